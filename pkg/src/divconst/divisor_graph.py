from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx
from sympy import primerange

from .kernels.graph import SmallGraph


class IllegalTripleError(ValueError):
    pass


@lru_cache(maxsize=None)
def primes_up_to(i: int) -> tuple[int, ...]:
    return tuple(primerange(2, i + 1))


def is_smooth(m: int, i: int) -> bool:
    """True when every prime factor of m is at most i (1 is smooth for every i)."""
    for p in primes_up_to(i):
        while m % p == 0:
            m //= p
        if m == 1:
            return True
    return m == 1


def largest_smooth_divisor(a: int, i: int) -> int:
    if a < 1 or i < 1:
        raise ValueError(f"largest_smooth_divisor needs a >= 1 and i >= 1, got a={a}, i={i}")
    d = 1
    for p in primes_up_to(i):
        while a % p == 0:
            a //= p
            d *= p
    return d


@dataclass(frozen=True, order=True)
class ReductionTriple:
    """Canonical (i, d, t): the anchor component of d in [d, t] with i = t // d."""

    i: int
    d: int
    t: int

    def __post_init__(self) -> None:
        if self.i < 1 or self.d < 1:
            raise IllegalTripleError(f"{self}: i and d must be positive")
        if not (self.i * self.d <= self.t < (self.i + 1) * self.d):
            raise IllegalTripleError(f"{self}: t must lie in [i*d, (i+1)*d)")
        if not is_smooth(self.d, self.i):
            raise IllegalTripleError(f"{self}: d must be {self.i}-smooth")

    @classmethod
    def of(cls, d: int, t: int) -> "ReductionTriple":
        if d < 1 or t < d:
            raise IllegalTripleError(f"no triple for d={d}, t={t}")
        return cls(t // d, d, t)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.i, self.d, self.t)


def reduce(a: int, n: int) -> ReductionTriple:
    """Map the anchor component of a in [a, n] to its canonical triple."""
    if not 1 <= a <= n:
        raise IllegalTripleError(f"reduce needs 1 <= a <= n, got a={a}, n={n}")
    i = n // a
    d = largest_smooth_divisor(a, i)
    return ReductionTriple(i, d, n * d // a)


@dataclass(frozen=True)
class Component(SmallGraph):
    anchor: int = 0

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.vertices or self.vertices[0] != self.anchor:
            raise ValueError(f"anchor {self.anchor} must be the smallest vertex")

    @classmethod
    def from_graph(cls, graph: SmallGraph) -> "Component":
        return cls(graph.vertices, graph.adjacency, graph.vertices[0])


def _divisibility_adjacency(vertices: tuple[int, ...]) -> tuple[int, ...]:
    adjacency = [0] * len(vertices)
    for k, u in enumerate(vertices):
        for j in range(k + 1, len(vertices)):
            if vertices[j] % u == 0:
                adjacency[k] |= 1 << j
                adjacency[j] |= 1 << k
    return tuple(adjacency)


def build_component(d: int, t: int) -> Component:
    """Connected component of d in the divisor graph of [d, t]."""
    if d < 1 or d > t:
        raise ValueError(f"build_component needs 1 <= d <= t, got d={d}, t={t}")
    seen = {d}
    queue = deque([d])
    while queue:
        v = queue.popleft()
        for w in range(2 * v, t + 1, v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
        for k in range(2, v // d + 1):
            if v % k == 0:
                w = v // k
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    vertices = tuple(sorted(seen))
    return Component(vertices, _divisibility_adjacency(vertices), d)


def remove_anchor(component: Component) -> list[Component]:
    rest = component.full_mask & ~1
    if rest == 0:
        return []
    pieces = component.induced(rest).components()
    return sorted((Component.from_graph(p) for p in pieces), key=lambda c: c.anchor)


@lru_cache(maxsize=256)
def _smooth_upto(i: int, limit: int) -> tuple[int, ...]:
    values = [1]
    for p in primes_up_to(i):
        grown = []
        for x in values:
            y = x * p
            while y <= limit:
                grown.append(y)
                y *= p
        values.extend(grown)
    return tuple(sorted(values))


def smooth_numbers_in(lo: int, hi: int, i: int) -> list[int]:
    if lo > hi:
        raise ValueError(f"smooth_numbers_in needs lo <= hi, got {lo} > {hi}")
    lo = max(lo, 1)
    if hi < lo:
        return []
    if i >= hi:
        return list(range(lo, hi + 1))
    # round the generation limit up so neighbouring queries share one table
    limit = 1 << hi.bit_length()
    table = _smooth_upto(i, limit)
    return list(table[bisect_left(table, lo): bisect_right(table, hi)])


def smooth_run_end(i: int, d: int, s: int) -> int:
    """Exclusive end of the run of t sharing the component of (d, s)."""
    block_end = (i + 1) * d
    following = smooth_numbers_in(s + 1, block_end - 1, i) if s + 1 < block_end else []
    return following[0] if following else block_end


def obs2_applies(d: int, t: int, p: int) -> bool:
    """Every vertex of the component of p*d in [p*d, p*t] is divisible by p."""
    return all(v % p == 0 for v in build_component(p * d, p * t).vertices)


def divisor_graph(lo: int, hi: int) -> nx.Graph:
    """Divisor graph of the integer interval [lo, hi] as a networkx graph."""
    graph = nx.Graph()
    graph.add_nodes_from(range(lo, hi + 1))
    for u in range(max(lo, 1), hi + 1):
        graph.add_edges_from((u, w) for w in range(2 * u, hi + 1, u))
    return graph
