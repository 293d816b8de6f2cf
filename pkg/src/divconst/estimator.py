import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import mpmath
from pydantic import BaseModel

from .config_utils import EstimatorSettings, KernelSettings
from .divisor_graph import (
    IllegalTripleError,
    ReductionTriple,
    obs2_applies,
    primes_up_to,
    smooth_numbers_in,
)
from .kernels import KernelBudgetError
from .local_stats import CONSTANT_KINDS, EVALUATORS, LocalStats, StatKind, canonical_triple
from .logger_utils import LoggingAgent
from .presets import BudgetSpec, resolve_budget
from .term_cache import TermCache


@lru_cache(maxsize=None)
def density(i: int) -> Fraction:
    """Product of (p-1)/p over primes p <= i."""
    result = Fraction(1)
    for p in primes_up_to(i):
        result *= Fraction(p - 1, p)
    return result


def weight(i: int, d: int, t: int) -> Fraction:
    ReductionTriple(i, d, t)
    return Fraction(1, t * (t + 1)) * density(i)


def interval_mass(i: int, lo: int, hi: int) -> Fraction:
    """Total weight of t in [lo, hi) at level i (the sum telescopes)."""
    return density(i) * Fraction(hi - lo, lo * hi)


@dataclass(frozen=True, order=True)
class TripleRun:
    """Consecutive t in [start, end) of one block, all sharing the component of start."""

    i: int
    d: int
    start: int
    end: int

    @property
    def triple(self) -> ReductionTriple:
        return ReductionTriple(self.i, self.d, self.start)

    @property
    def mass(self) -> Fraction:
        return interval_mass(self.i, self.start, self.end)

    @classmethod
    def single(cls, triple: ReductionTriple) -> "TripleRun":
        return cls(triple.i, triple.d, triple.t, triple.t + 1)


def _blocks(spec: BudgetSpec) -> list[tuple[int, int, int]]:
    blocks = []
    for i in range(1, spec.max_i + 1):
        for d in smooth_numbers_in(1, spec.max_d(i), i):
            blocks.append((d * i**5, i, d))
    blocks.sort()
    return blocks


def schedule(budget: Union[int, BudgetSpec]) -> Iterator[ReductionTriple]:
    """Every legal triple of the budget, by d*i^5 then i, d, t."""
    for _, i, d in _blocks(resolve_budget(budget)):
        for t in range(i * d, (i + 1) * d):
            yield ReductionTriple(i, d, t)


def schedule_runs(budget: Union[int, BudgetSpec]) -> Iterator[TripleRun]:
    """The blocks of ``schedule`` cut at i-smooth t; only run starts need evaluating."""
    for _, i, d in _blocks(resolve_budget(budget)):
        block_end = (i + 1) * d
        starts = smooth_numbers_in(i * d, block_end - 1, i)
        for k, start in enumerate(starts):
            end = starts[k + 1] if k + 1 < len(starts) else block_end
            yield TripleRun(i, d, start, end)


class CoverageLedger:
    """Union of covered t-intervals per (i, d)."""

    def __init__(self):
        self._covered: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def uncovered(self, i: int, d: int, lo: int, hi: int) -> list[tuple[int, int]]:
        pieces = []
        cursor = lo
        for a, b in self._covered.get((i, d), []):
            if b <= cursor:
                continue
            if a >= hi:
                break
            if a > cursor:
                pieces.append((cursor, a))
            cursor = max(cursor, b)
            if cursor >= hi:
                break
        if cursor < hi:
            pieces.append((cursor, hi))
        return pieces

    def cover(self, i: int, d: int, lo: int, hi: int) -> list[tuple[int, int]]:
        """Mark [lo, hi) covered and return the parts that were not covered before."""
        fresh = self.uncovered(i, d, lo, hi)
        if fresh:
            merged = sorted(self._covered.get((i, d), []) + fresh)
            joined = [merged[0]]
            for a, b in merged[1:]:
                if a <= joined[-1][1]:
                    joined[-1] = (joined[-1][0], max(joined[-1][1], b))
                else:
                    joined.append((a, b))
            self._covered[(i, d)] = joined
        return fresh


def exact_sum(values: Iterable[Fraction]) -> Fraction:
    """Pairwise summation keeps the intermediate denominators small."""
    level = list(values)
    if not level:
        return Fraction(0)
    while len(level) > 1:
        level = [
            level[k] + level[k + 1] if k + 1 < len(level) else level[k]
            for k in range(0, len(level), 2)
        ]
    return level[0]


UNKNOWN_RANGE = {
    StatKind.G: (Fraction(0), Fraction(1)),
    StatKind.V: (Fraction(-1), Fraction(0)),
}


class LogEnclosure:
    """
    Rational enclosures of logarithms of rationals.

    mpmath evaluates log1p of the exact offset at ``precision`` bits; the
    decimal rendering is widened by a relative 2**-(precision-20), which
    covers argument rounding, evaluation error and the decimal conversion.
    """

    def __init__(self, precision: int):
        self.precision = precision
        self.relative_error = Fraction(1, 2 ** (precision - 20))
        self._digits = int(precision * 0.30103) + 6
        self._memo: dict[Fraction, tuple[Fraction, Fraction]] = {}

    def log1p(self, offset: Fraction) -> tuple[Fraction, Fraction]:
        """Enclosure of log(1 + offset) for offset >= 0, lower end clamped at 0."""
        if offset == 0:
            return Fraction(0), Fraction(0)
        cached = self._memo.get(offset)
        if cached is not None:
            return cached
        with mpmath.workprec(self.precision):
            value = mpmath.log1p(mpmath.mpf(offset.numerator) / offset.denominator)
            centre = Fraction(mpmath.nstr(value, self._digits, strip_zeros=False))
        err = abs(centre) * self.relative_error
        result = (max(Fraction(0), centre - err), centre + err)
        self._memo[offset] = result
        return result

    def log(self, x: Fraction) -> tuple[Fraction, Fraction]:
        return self.log1p(x - 1)

    def log_gap_to_two(self, x: Fraction) -> tuple[Fraction, Fraction]:
        """Enclosure of log(2/x) for 1 <= x <= 2."""
        return self.log1p(Fraction(2) / x - 1)


@dataclass
class SkippedTerm:
    run: TripleRun
    reason: str


@dataclass
class BoundAccumulator:
    """
    Exact coverage mass per statistic value plus certified sums.

    ``value_mass[f]`` is the exact total weight of triples known to carry
    value f. Sums are formed from that table, so they do not depend on the
    order in which terms arrived.
    """

    kind: StatKind
    precision: int = 128
    value_mass: dict[Fraction, list[Fraction]] = field(default_factory=dict)
    ledger: CoverageLedger = field(default_factory=CoverageLedger)
    terms_evaluated: int = 0
    terms_credited: int = 0
    skipped: list[SkippedTerm] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.kind = StatKind(self.kind)
        self._logs = LogEnclosure(self.precision)
        self._totals: Optional[dict[Fraction, Fraction]] = None

    def add(self, i: int, d: int, lo: int, hi: int, value: Fraction) -> Fraction:
        """Credit value to t in [lo, hi) at (i, d); returns the newly covered mass."""
        fresh = self.ledger.cover(i, d, lo, hi)
        if not fresh:
            return Fraction(0)
        masses = [interval_mass(i, a, b) for a, b in fresh]
        self.value_mass.setdefault(Fraction(value), []).extend(masses)
        self._totals = None
        return exact_sum(masses)

    def is_covered(self, run: TripleRun) -> bool:
        return not self.ledger.uncovered(run.i, run.d, run.start, run.end)

    @property
    def totals(self) -> dict[Fraction, Fraction]:
        if self._totals is None:
            self._totals = {
                value: exact_sum(pieces) for value, pieces in sorted(self.value_mass.items())
            }
        return self._totals

    @property
    def covered_mass(self) -> Fraction:
        return exact_sum(self.totals.values())

    def _transform(self, value: Fraction) -> tuple[Fraction, Fraction]:
        if self.kind.multiplicative:
            return self._logs.log(value)
        return value, value

    @property
    def low_sum(self) -> Fraction:
        return exact_sum(w * self._transform(f)[0] for f, w in self.totals.items())

    @property
    def high_sum(self) -> Fraction:
        return exact_sum(w * self._transform(f)[1] for f, w in self.totals.items())

    @property
    def rounding_slack(self) -> Fraction:
        return self.high_sum - self.low_sum

    def log_interval(self) -> tuple[Fraction, Fraction]:
        """
        Certified [lower, upper] for the weighted sum over all triples.

        Unevaluated mass is filled with the bottom of the unknown range for
        the lower end and with the top for the upper end. Both ends are
        formed as sums of nonnegative gaps to those fills.
        """
        if self.kind.multiplicative:
            lower = exact_sum(w * self._logs.log(f)[0] for f, w in self.totals.items())
            _, log_two_hi = self._logs.log(Fraction(2))
            deficit = exact_sum(
                w * self._logs.log_gap_to_two(f)[0] for f, w in self.totals.items()
            )
            return lower, log_two_hi - deficit
        bottom, top = UNKNOWN_RANGE[self.kind]
        lower = bottom + exact_sum(w * (f - bottom) for f, w in self.totals.items())
        upper = top - exact_sum(w * (top - f) for f, w in self.totals.items())
        return lower, upper


@contextmanager
def unlimited_int_digits():
    """Lift the interpreter limit on int <-> str conversion for exact masses."""
    getter = getattr(sys, "get_int_max_str_digits", None)
    if getter is None:
        yield
        return
    previous = getter()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(previous)


def exact_text(value: Fraction) -> str:
    with unlimited_int_digits():
        return str(Fraction(value))


def parse_exact(text: str) -> Fraction:
    with unlimited_int_digits():
        return Fraction(text)


def _fixed(scaled: int, digits: int) -> str:
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _exp_bounds(lower: Fraction, upper: Fraction, precision: int, digits: int) -> tuple[str, str]:
    with mpmath.workprec(precision):
        cushion = mpmath.mpf(2) ** (20 - precision)
        scale = mpmath.mpf(10) ** digits
        lo = mpmath.exp(mpmath.mpf(lower.numerator) / lower.denominator) * (1 - cushion)
        hi = mpmath.exp(mpmath.mpf(upper.numerator) / upper.denominator) * (1 + cushion)
        # one unit outward absorbs the rounding of the final scaling
        lo_scaled = int(mpmath.floor(lo * scale)) - 1
        hi_scaled = int(mpmath.ceil(hi * scale)) + 1
    return _fixed(max(lo_scaled, 10**digits), digits), _fixed(hi_scaled, digits)


class ConstantInterval(BaseModel):
    name: str
    kind: StatKind
    lo: str
    hi: str
    digits: int
    budget: str
    obs2_jmax: int
    terms_evaluated: int
    terms_credited: int
    terms_skipped: int
    covered_mass: str
    wall_time: Optional[float] = None

    @property
    def lo_value(self) -> Fraction:
        return Fraction(self.lo)

    @property
    def hi_value(self) -> Fraction:
        return Fraction(self.hi)

    @property
    def covered(self) -> Fraction:
        return parse_exact(self.covered_mass)

    def intersects(self, lo: float, hi: float) -> bool:
        return self.lo_value <= Fraction(str(hi)) and Fraction(str(lo)) <= self.hi_value


KIND_CONSTANTS = {kind: name for name, kind in CONSTANT_KINDS.items()}


def bounds(
    acc: BoundAccumulator,
    digits: int = 12,
    budget: str = "",
    obs2_jmax: int = 0,
) -> ConstantInterval:
    lower, upper = acc.log_interval()
    if acc.kind.multiplicative:
        lo, hi = _exp_bounds(lower, upper, acc.precision, digits)
    else:
        scale = 10**digits
        lo = _fixed(math.floor(lower * scale), digits)
        hi = _fixed(math.ceil(upper * scale), digits)
    return ConstantInterval(
        name=KIND_CONSTANTS[acc.kind],
        kind=acc.kind,
        lo=lo,
        hi=hi,
        digits=digits,
        budget=budget,
        obs2_jmax=obs2_jmax,
        terms_evaluated=acc.terms_evaluated,
        terms_credited=acc.terms_credited,
        terms_skipped=len(acc.skipped),
        covered_mass=exact_text(acc.covered_mass),
    )


def _evaluate_remote(job: tuple[str, int, int, dict]) -> tuple[Optional[Fraction], Optional[str]]:
    kind, d, t, limits = job
    base = canonical_triple(d, t)
    try:
        value = EVALUATORS[StatKind(kind)](base.d, base.t, KernelSettings(**limits))
    except KernelBudgetError as e:
        return None, str(e)
    return value.value, None


class Accumulation:
    """
    Folds runs into a BoundAccumulator in the given order.

    A run already covered by the multiplication rule adds no mass; its
    value comes from the memo of the canonical triple. With several workers
    every uncached run start is evaluated in a process pool first and the
    fold is the same.
    """

    def __init__(
        self,
        kind: StatKind,
        obs2_jmax: int = 40,
        cache: Optional[TermCache] = None,
        limits: Optional[KernelSettings] = None,
        workers: int = 1,
        precision: int = 128,
    ):
        self.kind = StatKind(kind)
        self.obs2_jmax = obs2_jmax
        self.stats = LocalStats(cache, limits)
        self.workers = workers
        self.acc = BoundAccumulator(self.kind, precision=precision)
        self.logger = LoggingAgent("Accumulator").logger

    def _evaluate(self, run: TripleRun) -> tuple[Optional[Fraction], Optional[str]]:
        try:
            return self.stats.stat(self.kind, run.d, run.start).value, None
        except KernelBudgetError as e:
            return None, str(e)

    def _prefetch(self, runs: list[TripleRun]) -> dict[TripleRun, tuple[Optional[Fraction], Optional[str]]]:
        limits = self.stats.limits.model_dump()
        pending = []
        for run in runs:
            cached = self.stats.cache.get(self.kind, *run.triple.as_tuple()) if self.stats.cache else None
            if cached is None:
                pending.append(run)
        self.logger.info(f"Evaluating {len(pending)} run starts on {self.workers} workers")
        jobs = [(self.kind.value, run.d, run.start, limits) for run in pending]
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            outcomes = list(pool.map(_evaluate_remote, jobs, chunksize=8))
        for run, (value, _) in zip(pending, outcomes):
            if value is not None:
                self.stats.remember(self.kind, run.d, run.start, value)
        return dict(zip(pending, outcomes))

    def _credit(self, run: TripleRun, value: Fraction) -> None:
        last = run.end - 1
        for p in primes_up_to(run.i):
            if not obs2_applies(run.d, run.start, p):
                continue
            if last != run.start and not obs2_applies(run.d, last, p):
                continue
            scale = 1
            for _ in range(self.obs2_jmax):
                scale *= p
                # every t' in [p^j start, p^j last] shares the scaled component
                gained = self.acc.add(run.i, scale * run.d, scale * run.start, scale * last + 1, value)
                if gained:
                    self.acc.terms_credited += 1

    def fold(self, runs: Iterable[TripleRun]) -> BoundAccumulator:
        runs = list(runs)
        prefetched = self._prefetch(runs) if self.workers > 1 else {}
        for run in runs:
            covered = self.acc.is_covered(run)
            outcome = prefetched.get(run)
            if outcome is not None and outcome[0] is None:
                value, reason = outcome
            else:
                # successful prefetches already sit in the stats memo
                value, reason = self._evaluate(run)
            if value is None:
                if covered:
                    continue
                self.acc.skipped.append(SkippedTerm(run, reason))
                self.logger.warning(
                    f"Skipped {self.kind.value}{run.triple.as_tuple()} (t < {run.end}): {reason}"
                )
                continue
            if not covered:
                self.acc.terms_evaluated += 1
                self.acc.add(run.i, run.d, run.start, run.end, value)
            # covered runs still credit their multiples: coverage is the union over all runs
            self._credit(run, value)
        return self.acc


def accumulate(
    kind: StatKind,
    triples: Iterable[Union[ReductionTriple, TripleRun]],
    obs2_jmax: int = 40,
    cache: Optional[TermCache] = None,
    limits: Optional[KernelSettings] = None,
    workers: int = 1,
    precision: int = 128,
) -> BoundAccumulator:
    runs = [
        item if isinstance(item, TripleRun) else TripleRun.single(item)
        for item in triples
    ]
    return Accumulation(kind, obs2_jmax, cache, limits, workers, precision).fold(runs)


class ConstantEstimator:
    def __init__(
        self,
        name: str,
        budget: Union[int, BudgetSpec, None] = None,
        obs2_jmax: Optional[int] = None,
        cache_path: Optional[Path] = None,
        limits: Optional[KernelSettings] = None,
        settings: Optional[EstimatorSettings] = None,
        workers: Optional[int] = None,
    ):
        if name not in CONSTANT_KINDS:
            raise ValueError(f"unknown constant {name!r}; choose from {', '.join(CONSTANT_KINDS)}")
        self.name = name
        self.kind = CONSTANT_KINDS[name]
        self.settings = settings or EstimatorSettings.load()
        self.budget = resolve_budget(budget)
        self.obs2_jmax = self.settings.obs2_jmax if obs2_jmax is None else obs2_jmax
        self.workers = workers or self.settings.workers
        self.limits = limits or KernelSettings.load()
        self.cache_path = cache_path
        self.logger = LoggingAgent("ConstantEstimator").logger

    def run(self, with_timing: bool = False) -> ConstantInterval:
        started = time.perf_counter()
        cache = TermCache(self.cache_path) if self.cache_path else None
        self.logger.info(
            f"Estimating {self.name} with budget {self.budget.descriptor}, obs2_jmax={self.obs2_jmax}"
        )
        acc = accumulate(
            self.kind,
            schedule_runs(self.budget),
            self.obs2_jmax,
            cache,
            self.limits,
            self.workers,
            self.settings.precision_bits,
        )
        interval = bounds(acc, self.settings.output_digits, self.budget.descriptor, self.obs2_jmax)
        if with_timing:
            interval.wall_time = round(time.perf_counter() - started, 3)
        self.logger.info(
            f"{self.name} in [{interval.lo}, {interval.hi}] after {interval.terms_evaluated} runs, "
            f"{interval.terms_skipped} skipped"
        )
        return interval


def estimate_constant(
    name: str,
    budget: Union[int, BudgetSpec, None] = None,
    obs2_jmax: Optional[int] = None,
    cache_path: Optional[Path] = None,
    **kwargs,
) -> ConstantInterval:
    return ConstantEstimator(name, budget, obs2_jmax, cache_path, **kwargs).run()


__all__ = [
    "BoundAccumulator",
    "ConstantEstimator",
    "ConstantInterval",
    "CoverageLedger",
    "IllegalTripleError",
    "TripleRun",
    "accumulate",
    "bounds",
    "density",
    "estimate_constant",
    "schedule",
    "schedule_runs",
    "weight",
]
