from math import comb

import mpmath
from pydantic import BaseModel, model_validator

ENTROPY_TOLERANCE = 1e-9


class EntropyDomainError(ValueError):
    pass


def binary_entropy(lam: float) -> float:
    """H(lam) = -lam*log2(lam) + (lam-1)*log2(1-lam) on (0, 1/2]."""
    if not 0 < lam <= 0.5:
        raise EntropyDomainError(f"binary entropy needs 0 < lambda <= 1/2, got {lam}")
    lam = mpmath.mpf(lam)
    return float(-lam * mpmath.log(lam, 2) + (lam - 1) * mpmath.log(1 - lam, 2))


def entropy_inverse(y: float) -> float:
    """The lambda in (0, 1/2] with H(lambda) = y, by bisection."""
    if not 0 < y <= 1:
        raise EntropyDomainError(f"entropy inverse needs 0 < y <= 1, got {y}")
    if y == 1:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > ENTROPY_TOLERANCE:
        mid = (lo + hi) / 2
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


class MedianBounds(BaseModel):
    """Asymptotic fractions: lower_frac * n < median size < upper_frac * n."""

    alpha_lo: float
    alpha_hi: float
    eta_lo: float
    lower_frac: float
    upper_frac: float
    label: str = "asymptotic fractions"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.lower_frac < self.upper_frac:
            raise EntropyDomainError(
                f"lower fraction {self.lower_frac} is not below upper fraction {self.upper_frac}"
            )
        return self


def median_bounds(alpha_lo: float, alpha_hi: float, eta_lo: float) -> MedianBounds:
    if not alpha_lo > 1:
        raise EntropyDomainError(f"alpha_lo must exceed 1, got {alpha_lo}")
    if alpha_hi < alpha_lo:
        raise EntropyDomainError(f"alpha_hi {alpha_hi} is below alpha_lo {alpha_lo}")
    if not eta_lo > 1:
        raise EntropyDomainError(f"eta_lo must exceed 1, got {eta_lo}")

    lower = entropy_inverse(float(mpmath.log(alpha_lo, 2)))
    excess = float(2 * (mpmath.log(alpha_hi, 2) - mpmath.log(eta_lo, 2)))
    if excess > 1:
        raise EntropyDomainError(
            f"2*log2(alpha_hi/eta_lo) = {excess} exceeds 1; the intervals are inconsistent"
        )
    # no surplus of maximal sets over primitive sets to exploit: the trivial n/2
    upper = 0.5 if excess <= 0 else 0.5 * (1 - entropy_inverse(excess))
    return MedianBounds(
        alpha_lo=alpha_lo, alpha_hi=alpha_hi, eta_lo=eta_lo,
        lower_frac=lower, upper_frac=upper,
    )


def binomial_partial_sum_log2(n: int, k: int) -> float:
    """log2 of sum_{i <= k} C(n, i)."""
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return float(mpmath.log(sum(comb(n, i) for i in range(k + 1)), 2))
