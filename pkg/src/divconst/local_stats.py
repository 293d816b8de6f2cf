from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Optional

from .config_utils import KernelSettings
from .divisor_graph import (
    ReductionTriple,
    build_component,
    obs2_applies,
    primes_up_to,
    remove_anchor,
    smooth_numbers_in,
)
from .kernels import (
    count_independent_sets,
    count_maximal_independent_sets,
    gp_free_profile,
    max_independent_set,
    min_path_cover,
)
from .logger_utils import LoggingAgent

if TYPE_CHECKING:
    from .term_cache import TermCache


class StatKind(str, Enum):
    R = "r"
    S = "s"
    W = "w"
    H = "h"
    G = "g"
    V = "v"

    @property
    def multiplicative(self) -> bool:
        return self in (StatKind.R, StatKind.S, StatKind.W, StatKind.H)


CONSTANT_KINDS = {
    "alpha": StatKind.R,
    "beta": StatKind.S,
    "eta": StatKind.W,
    "theta": StatKind.H,
    "b": StatKind.G,
    "c": StatKind.V,
}


class StatRangeError(Exception):
    pass


def check_range(kind: StatKind, value: Fraction) -> None:
    if kind.multiplicative:
        ok = 1 <= value <= 2
    elif kind is StatKind.G:
        ok = value in (0, 1)
    else:
        ok = value in (-1, 0, 1)
    if not ok:
        raise StatRangeError(f"{kind.value}-statistic {value} is outside its range")


@dataclass(frozen=True)
class StatValue:
    kind: StatKind
    value: Fraction
    # (maximum size with the anchor, maximum size without it); s-statistic only
    sizes: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        check_range(self.kind, self.value)

    def __str__(self) -> str:
        return str(self.value)


def stat_r(d: int, t: int, limits: Optional[KernelSettings] = None) -> StatValue:
    component = build_component(d, t)
    below = 1
    for piece in remove_anchor(component):
        below *= count_independent_sets(piece, limits)
    return StatValue(StatKind.R, Fraction(count_independent_sets(component, limits), below))


def stat_s(d: int, t: int, limits: Optional[KernelSettings] = None) -> StatValue:
    component = build_component(d, t)
    whole = max_independent_set(component, limits)
    size, count = 0, 1
    for piece in remove_anchor(component):
        best = max_independent_set(piece, limits)
        size += best.size
        count *= best.count
    return StatValue(
        StatKind.S, Fraction(whole.count, count), sizes=(whole.size, size)
    )


def stat_w(d: int, t: int, limits: Optional[KernelSettings] = None) -> StatValue:
    component = build_component(d, t)
    below = 1
    for piece in remove_anchor(component):
        below *= count_maximal_independent_sets(piece, limits)
    return StatValue(
        StatKind.W, Fraction(count_maximal_independent_sets(component, limits), below)
    )


def stat_h(d: int, t: int, limits: Optional[KernelSettings] = None) -> StatValue:
    vertices = build_component(d, t).vertices
    _, above = gp_free_profile(vertices, limits)
    _, below = gp_free_profile(vertices[1:], limits)
    return StatValue(StatKind.H, Fraction(above, below))


def stat_g(d: int, t: int, limits: Optional[KernelSettings] = None) -> StatValue:
    vertices = build_component(d, t).vertices
    above, _ = gp_free_profile(vertices, limits)
    below, _ = gp_free_profile(vertices[1:], limits)
    return StatValue(StatKind.G, Fraction(above - below))


def stat_v(d: int, t: int, limits: Optional[KernelSettings] = None) -> StatValue:
    component = build_component(d, t)
    below = sum(min_path_cover(piece, limits) for piece in remove_anchor(component))
    value = min_path_cover(component, limits) - below
    if value == 1 and (d, t) != (1, 1):
        raise StatRangeError(f"v({d},{t}) = 1 away from (1,1)")
    return StatValue(StatKind.V, Fraction(value))


EVALUATORS = {
    StatKind.R: stat_r,
    StatKind.S: stat_s,
    StatKind.W: stat_w,
    StatKind.H: stat_h,
    StatKind.G: stat_g,
    StatKind.V: stat_v,
}


def run_start(d: int, t: int) -> ReductionTriple:
    """Largest i-smooth t' <= t in the block of d; it has the same component as t."""
    triple = ReductionTriple.of(d, t)
    i = triple.i
    start = smooth_numbers_in(i * d, t, i)[-1]
    return ReductionTriple(i, d, start)


def canonical_triple(d: int, t: int) -> ReductionTriple:
    """Run start with every prime removed whose multiplication rule applies."""
    triple = run_start(d, t)
    stripped = True
    while stripped:
        stripped = False
        for p in primes_up_to(triple.i):
            if triple.d % p == 0 and obs2_applies(triple.d // p, triple.t // p, p):
                triple = run_start(triple.d // p, triple.t // p)
                stripped = True
                break
    return triple


class LocalStats:
    """
    Memoised evaluation of the six statistics on canonical triples.

    Values are keyed by (kind, i, d, t). A request is answered from memory,
    then from the persistent term cache, and only then evaluated on the
    canonical triple, whose value is written back to the cache.
    """

    def __init__(
        self,
        cache: Optional["TermCache"] = None,
        limits: Optional[KernelSettings] = None,
    ):
        self.cache = cache
        self.limits = limits or KernelSettings.load()
        self.memo: dict[tuple[StatKind, int, int, int], StatValue] = {}
        self.logger = LoggingAgent("LocalStats").logger

    def _lookup(self, kind: StatKind, triple: ReductionTriple) -> Optional[StatValue]:
        key = (kind, *triple.as_tuple())
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if self.cache is not None:
            value = self.cache.get(kind, *triple.as_tuple())
            if value is not None:
                hit = StatValue(kind, value)
                self.memo[key] = hit
                return hit
        return None

    def stat(self, kind: StatKind, d: int, t: int) -> StatValue:
        kind = StatKind(kind)
        requested = ReductionTriple.of(d, t)
        hit = self._lookup(kind, requested)
        if hit is not None:
            return hit

        base = canonical_triple(d, t)
        hit = self._lookup(kind, base)
        if hit is None:
            hit = EVALUATORS[kind](base.d, base.t, self.limits)
            self.memo[(kind, *base.as_tuple())] = hit
            if self.cache is not None:
                self.cache.put(kind, *base.as_tuple(), hit.value)
            self.logger.debug(f"{kind.value}{base.as_tuple()} = {hit.value}")
        self.memo[(kind, *requested.as_tuple())] = hit
        return hit

    def remember(self, kind: StatKind, d: int, t: int, value: Fraction) -> StatValue:
        """Store a value evaluated elsewhere (e.g. by a worker process)."""
        kind = StatKind(kind)
        requested = ReductionTriple.of(d, t)
        base = canonical_triple(d, t)
        known = StatValue(kind, Fraction(value))
        self.memo[(kind, *base.as_tuple())] = known
        self.memo[(kind, *requested.as_tuple())] = known
        if self.cache is not None:
            self.cache.put(kind, *base.as_tuple(), known.value)
        return known


def stat(
    kind: StatKind,
    d: int,
    t: int,
    cache: Optional["TermCache"] = None,
    limits: Optional[KernelSettings] = None,
) -> StatValue:
    return LocalStats(cache, limits).stat(kind, d, t)
