import math

import pytest

from divconst.analysis import (
    EntropyDomainError,
    MedianBounds,
    binary_entropy,
    binomial_partial_sum_log2,
    entropy_inverse,
    median_bounds,
)


def test_binary_entropy_values():
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.25) == pytest.approx(0.8112781244591328)
    assert binary_entropy(1e-6) < 1e-4


@pytest.mark.parametrize("lam", [0, -0.1, 0.6])
def test_binary_entropy_domain(lam):
    with pytest.raises(EntropyDomainError):
        binary_entropy(lam)


def test_entropy_inverse():
    assert entropy_inverse(1) == 0.5
    assert entropy_inverse(binary_entropy(0.25)) == pytest.approx(0.25, abs=1e-8)
    assert entropy_inverse(math.log(1.572939) / math.log(2)) == pytest.approx(0.168153, abs=1e-6)
    with pytest.raises(EntropyDomainError):
        entropy_inverse(0)
    with pytest.raises(EntropyDomainError):
        entropy_inverse(1.5)


@pytest.mark.parametrize("y", [k / 50 for k in range(1, 51)])
def test_entropy_round_trip(y):
    assert abs(binary_entropy(entropy_inverse(y)) - y) <= 1e-8


def test_published_median_fractions():
    result = median_bounds(1.572939, 1.574445, 1.2125)
    assert result.lower_frac == pytest.approx(0.168153, abs=1e-6)
    assert result.upper_frac == pytest.approx(0.391752, abs=1e-6)
    assert result.label == "asymptotic fractions"


def test_degenerate_median_inputs():
    root_two = math.sqrt(2)
    result = median_bounds(root_two, root_two, root_two * (1 + 1e-9))
    assert result.lower_frac == pytest.approx(entropy_inverse(0.5), abs=2e-9)
    assert result.upper_frac == 0.5
    assert median_bounds(1.5, 1.5, 1.5).upper_frac == 0.5


def test_median_monotonicity():
    base = median_bounds(1.55, 1.58, 1.2)
    assert median_bounds(1.56, 1.58, 1.2).lower_frac > base.lower_frac
    assert median_bounds(1.55, 1.58, 1.21).upper_frac > base.upper_frac
    assert median_bounds(1.55, 1.59, 1.2).upper_frac < base.upper_frac


def test_median_domain():
    with pytest.raises(EntropyDomainError):
        median_bounds(1.0, 1.5, 1.2)
    with pytest.raises(EntropyDomainError):
        median_bounds(1.5, 1.4, 1.2)
    with pytest.raises(EntropyDomainError):
        median_bounds(1.9, 1.99, 1.01)
    with pytest.raises(ValueError):
        MedianBounds(alpha_lo=1.5, alpha_hi=1.5, eta_lo=1.2, lower_frac=0.3, upper_frac=0.2)


@pytest.mark.parametrize("n", range(4, 25, 4))
def test_binomial_sums_follow_entropy(n):
    for k in range(1, n // 2 + 1):
        lam = k / n
        gap = n * binary_entropy(lam) - binomial_partial_sum_log2(n, k)
        assert -1e-9 <= gap <= 2 * math.log2(n + 1)
