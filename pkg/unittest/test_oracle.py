from fractions import Fraction

import pytest

from divconst.config_utils import OracleSettings
from divconst.divisor_graph import reduce
from divconst.estimator import estimate_constant
from divconst.local_stats import LocalStats, StatKind
from divconst.oracle import Oracle, OracleGuardError


@pytest.fixture(scope="module")
def oracle():
    return Oracle(OracleSettings())


@pytest.mark.parametrize(
    "n, Q, M, m",
    [(1, 2, (1, 1), 1), (2, 3, (1, 2), 2), (3, 5, (2, 1), 2), (4, 7, (2, 2), 3), (5, 13, (3, 2), 3)],
)
def test_small_counts(oracle, n, Q, M, m):
    counts = oracle.brute_all(n)
    assert counts.Q == Q
    assert (counts.M_size, counts.M_count) == M
    assert counts.m_count == m


def test_path_cover_of_seven(oracle):
    assert oracle.brute_all(7).C == 2


@pytest.mark.parametrize("n", range(1, 17))
def test_global_invariants(oracle, n):
    counts = oracle.brute_all(n)
    assert counts.M_size == (n + 1) // 2
    assert counts.M_count <= counts.m_count <= counts.Q
    assert 2 ** ((n + 1) // 2) <= counts.Q <= 2**n
    assert counts.G <= n
    assert 1 <= counts.C <= n


@pytest.mark.parametrize("n", range(2, 23))
def test_decomposed_counts_match_exhaustive(oracle, n):
    exhaustive = oracle.interval_counts(1, n)
    decomposed = oracle.decomposed_counts(n)
    for field in ("Q", "M_size", "M_count", "m_count", "H", "G", "C"):
        assert getattr(decomposed, field) == getattr(exhaustive, field), field


def test_path_cover_changes_by_at_most_one(oracle):
    covers = [oracle.brute_all(n).C for n in range(1, 21)]
    assert all(abs(a - b) <= 1 for a, b in zip(covers, covers[1:]))


@pytest.mark.parametrize("kind", list(StatKind))
@pytest.mark.parametrize("n", range(1, 21))
def test_telescoping(oracle, kind, n):
    report = oracle.verify_telescoping_report(kind, n)
    assert report.passed, report.first_mismatch


def test_telescoping_examples(oracle):
    report = oracle.verify_telescoping_report(StatKind.R, 9)
    assert report.rows[0].partial == str(oracle.brute_all(9).Q)
    assert oracle.verify_telescoping_report(StatKind.V, 7).rows[0].partial == "2"
    assert oracle.verify_telescoping_report(StatKind.W, 4).rows[0].partial == "3"
    assert oracle.verify_telescoping(StatKind.R, 9)


def test_guards():
    small = Oracle(OracleSettings(max_exhaustive_n=8, max_decomposed_n=10, conjecture_limit=20))
    with pytest.raises(OracleGuardError):
        small.verify_telescoping_report(StatKind.R, 9)
    with pytest.raises(OracleGuardError):
        small.brute_all(11)
    with pytest.raises(OracleGuardError):
        small.check_submultiplicative(21)
    assert small.brute_all(10).method == "decomposed"


@pytest.mark.parametrize("k, expected", [(1, Fraction(1)), (2, Fraction(1, 2)), (3, Fraction(2, 3)), (5, Fraction(6, 7))])
def test_forward_g(oracle, k, expected):
    assert oracle.forward_g(k).value == expected


def test_forward_g_stays_in_unit_interval(oracle):
    for k in range(1, 40):
        assert 0 <= oracle.forward_g(k).value <= 1


def test_submultiplicative_checks(oracle):
    g = {k: oracle.forward_g(k).value for k in (2, 3, 4, 6)}
    assert g[6] <= g[2] * g[3]
    assert g[4] <= g[2]
    assert oracle.check_submultiplicative(30) == []


@pytest.mark.slow
def test_submultiplicative_up_to_sixty(oracle):
    assert oracle.check_submultiplicative(60) == []


def test_empirical_average(oracle):
    average = oracle.empirical_average(StatKind.V, 7)
    assert average == Fraction(oracle.brute_all(7).C, 7)
    assert oracle.empirical_average(StatKind.G, 9) == Fraction(oracle.brute_all(9).G, 9)
    with pytest.raises(ValueError):
        oracle.empirical_average(StatKind.R, 5)


@pytest.mark.parametrize("n", [8, 15, 24])
def test_path_cover_model_matches_exhaustive(oracle, n):
    assert oracle.interval_optimum(StatKind.V, n) == oracle.brute_all(n).C


@pytest.mark.parametrize("n", [9, 20, 40])
def test_gp_free_model_matches_search(oracle, n):
    assert oracle.interval_optimum(StatKind.G, n) == oracle.brute_all(n).G


@pytest.mark.parametrize("kind, n", [(StatKind.V, 30), (StatKind.G, 40)])
def test_local_values_telescope_to_the_interval_optimum(oracle, kind, n):
    stats = LocalStats()
    total = Fraction(0)
    for k in range(1, n + 1):
        triple = reduce(k, n)
        total += stats.stat(kind, triple.d, triple.t).value
    assert total == oracle.interval_optimum(kind, n)
    assert oracle.empirical_average(kind, n) == total / n


def test_interval_optimum_guards():
    small = Oracle(OracleSettings(max_model_n=50))
    with pytest.raises(OracleGuardError):
        small.interval_optimum(StatKind.V, 51)
    with pytest.raises(ValueError):
        small.interval_optimum(StatKind.H, 10)


@pytest.mark.slow
@pytest.mark.parametrize("kind, constant", [(StatKind.V, "c"), (StatKind.G, "b")])
def test_empirical_average_lies_in_the_constant_interval(oracle, kind, constant):
    interval = estimate_constant(constant, 10**4)
    average = oracle.empirical_average(kind, 2000)
    assert interval.lo_value <= average <= interval.hi_value
