import math
import random
from fractions import Fraction

import pytest

from divconst.estimator import (
    BoundAccumulator,
    ConstantEstimator,
    CoverageLedger,
    IllegalTripleError,
    TripleRun,
    accumulate,
    bounds,
    density,
    estimate_constant,
    exact_sum,
    exact_text,
    interval_mass,
    parse_exact,
    schedule,
    schedule_runs,
    weight,
)
from divconst.divisor_graph import ReductionTriple
from divconst.local_stats import StatKind
from divconst.presets import PRESETS, BudgetSpec, UnknownPresetError, resolve_budget
from divconst.term_cache import TermCache

PUBLISHED = {
    "alpha": (1.572939, 1.574445),
    "beta": (1.148192, 1.148230),
    "eta": (1.212500, 1.240904),
    "theta": (1.901448, 1.925556),
    "b": (0.81841, 0.81922),
    "c": (0.176448, 0.2289),
}

FIRST = [ReductionTriple(1, 1, 1)]


def test_density_and_weight():
    assert density(1) == 1
    assert density(3) == Fraction(1, 3)
    assert weight(1, 1, 1) == Fraction(1, 2)
    assert weight(2, 1, 2) == Fraction(1, 12)
    assert weight(3, 2, 7) == Fraction(1, 168)
    with pytest.raises(IllegalTripleError):
        weight(2, 3, 6)


def test_interval_mass_telescopes():
    assert interval_mass(3, 6, 8) == weight(3, 2, 6) + weight(3, 2, 7)
    with pytest.raises(IllegalTripleError):
        weight(3, 2, 8)


def test_schedule_small_budgets():
    assert [t.as_tuple() for t in schedule(1)] == [(1, 1, 1)]
    assert {t.as_tuple() for t in schedule(32)} == {(1, 1, 1), (2, 1, 2)}
    triples = {t.as_tuple() for t in schedule(3 * 5**5)}
    assert {(5, 3, t) for t in range(15, 18)} <= triples
    assert (5, 3, 18) not in triples


def test_schedule_order_and_legality():
    previous = None
    for triple in schedule(5000):
        key = (triple.d * triple.i**5, triple.i, triple.d, triple.t)
        if previous is not None:
            assert key > previous
        previous = key


def test_runs_cover_the_schedule():
    triples = list(schedule(5000))
    runs = list(schedule_runs(5000))
    assert exact_sum(run.mass for run in runs) == exact_sum(
        weight(*t.as_tuple()) for t in triples
    )
    assert sum(run.end - run.start for run in runs) == len(triples)
    assert exact_sum(run.mass for run in runs) < 1


def test_coverage_ledger():
    ledger = CoverageLedger()
    assert ledger.cover(1, 1, 2, 5) == [(2, 5)]
    assert ledger.cover(1, 1, 3, 8) == [(5, 8)]
    assert ledger.cover(1, 1, 4, 6) == []
    assert ledger.uncovered(1, 1, 0, 10) == [(0, 2), (8, 10)]
    assert ledger.uncovered(2, 1, 0, 10) == [(0, 10)]


def test_accumulator_never_counts_mass_twice():
    acc = BoundAccumulator(StatKind.R)
    assert acc.add(1, 1, 1, 2, Fraction(2)) == Fraction(1, 2)
    assert acc.add(1, 1, 1, 2, Fraction(2)) == 0
    assert acc.covered_mass == Fraction(1, 2)


@pytest.mark.parametrize("kind", [StatKind.R, StatKind.H])
def test_first_term_gives_root_two(kind):
    acc = accumulate(kind, FIRST, obs2_jmax=0)
    assert acc.covered_mass == Fraction(1, 2)
    interval = bounds(acc)
    assert interval.lo.startswith("1.41421356237")
    assert interval.lo_value <= Fraction(14142135623731, 10**13)
    assert 2 <= interval.hi_value <= Fraction(2000000000002, 10**12)


def test_first_term_additive_constants():
    c = bounds(accumulate(StatKind.V, FIRST, obs2_jmax=0))
    assert (c.lo_value, c.hi_value) == (0, Fraction(1, 2))
    assert c.lo == "0.000000000000"
    b = bounds(accumulate(StatKind.G, FIRST, obs2_jmax=0))
    assert (b.lo_value, b.hi_value) == (Fraction(1, 2), 1)


def test_log_interval_is_ordered():
    acc = accumulate(StatKind.R, schedule_runs(2000), obs2_jmax=3)
    lower, upper = acc.log_interval()
    assert lower <= upper
    assert acc.low_sum <= acc.high_sum
    assert 0 <= acc.rounding_slack < Fraction(1, 10**20)


def test_order_does_not_change_exact_totals():
    runs = list(schedule_runs(3000))
    shuffled = runs[:]
    random.Random(7).shuffle(shuffled)
    first = accumulate(StatKind.R, runs, obs2_jmax=4)
    second = accumulate(StatKind.R, shuffled, obs2_jmax=4)
    assert first.covered_mass == second.covered_mass
    assert first.totals == second.totals
    assert (bounds(first).lo, bounds(first).hi) == (bounds(second).lo, bounds(second).hi)


def test_obs2_credit_adds_mass():
    runs = list(schedule_runs(1000))
    plain = accumulate(StatKind.R, runs, obs2_jmax=0)
    credited = accumulate(StatKind.R, runs, obs2_jmax=10)
    assert credited.covered_mass > plain.covered_mass
    assert credited.terms_credited > 0
    assert credited.covered_mass < 1


def test_cached_run_reuses_terms(cache_file):
    first = estimate_constant("alpha", 1000, obs2_jmax=2, cache_path=cache_file)
    written = len(TermCache(cache_file))
    assert written > 0
    second = estimate_constant("alpha", 1000, obs2_jmax=2, cache_path=cache_file)
    assert first == second
    assert len(TermCache(cache_file)) == written


def test_document_without_timing_is_reproducible():
    first = ConstantEstimator("c", 1000).run()
    second = ConstantEstimator("c", 1000).run()
    assert first.wall_time is None
    assert first.model_dump_json() == second.model_dump_json()
    timed = ConstantEstimator("c", 1000).run(with_timing=True)
    assert timed.wall_time is not None


def test_unknown_constant():
    with pytest.raises(ValueError):
        ConstantEstimator("gamma")


def test_presets():
    assert resolve_budget().name == "desk"
    assert resolve_budget(500).descriptor == "d*i^5<=500"
    assert resolve_budget(preset="paper-alpha").max_d(5) == 11_249_999
    assert PRESETS["paper-theta"].max_d(100) == 3
    assert PRESETS["paper-theta"].max_i == 250
    with pytest.raises(UnknownPresetError):
        resolve_budget(preset="nope")
    with pytest.raises(ValueError):
        BudgetSpec(0)


@pytest.mark.parametrize("name", sorted(PUBLISHED))
def test_small_budget_intervals_intersect_published_ranges(name):
    interval = estimate_constant(name, 3000)
    assert interval.lo_value <= interval.hi_value
    if name not in ("b", "c"):
        assert interval.lo_value >= 1
    assert interval.intersects(*PUBLISHED[name])


def test_alpha_two_families_bound():
    interval = estimate_constant("alpha", 10**4)
    assert float(interval.lo) >= 1.5131 - 1e-3


def test_exact_mass_beyond_the_int_string_limit():
    interval = estimate_constant("c", 10**4)
    acc = accumulate(StatKind.V, schedule_runs(10**4), obs2_jmax=40)
    assert interval.covered == acc.covered_mass
    assert len(interval.covered_mass) > 4300
    assert 0 < interval.covered < 1
    assert parse_exact(exact_text(acc.covered_mass)) == acc.covered_mass


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(PUBLISHED))
def test_budget_ladder_is_monotone(name):
    previous = None
    for budget in (10**3, 10**4, 10**5, 10**6):
        interval = estimate_constant(name, budget)
        assert interval.covered < 1
        assert interval.intersects(*PUBLISHED[name])
        if previous is not None:
            assert interval.covered > previous.covered
            assert interval.lo_value >= previous.lo_value
            assert interval.hi_value <= previous.hi_value
        previous = interval


@pytest.mark.slow
def test_alpha_beats_the_elementary_bound():
    interval = estimate_constant("alpha", 10**6)
    if float(interval.lo) < 1.55967:
        interval = estimate_constant("alpha", 10**7)
    assert float(interval.lo) >= 1.55967
    assert math.isfinite(float(interval.hi))


def test_worker_pool_matches_serial_fold():
    runs = list(schedule_runs(800))
    serial = accumulate(StatKind.W, runs, obs2_jmax=3)
    pooled = accumulate(StatKind.W, runs, obs2_jmax=3, workers=2)
    assert pooled.totals == serial.totals
    assert pooled.terms_evaluated == serial.terms_evaluated
