from dataclasses import dataclass
from math import isqrt
from typing import Iterable, Optional

from ortools.sat.python import cp_model

from ..config_utils import KernelSettings
from .graph import KernelBudgetError, check_size, default_limits, iter_bits


@dataclass(frozen=True, order=True)
class GpTriple:
    first: int
    middle: int
    third: int

    def __post_init__(self) -> None:
        if self.middle * self.middle != self.first * self.third:
            raise ValueError(f"{self} is not a geometric progression")
        if self.middle % self.first or self.middle // self.first < 2:
            raise ValueError(f"{self} does not have an integral ratio >= 2")

    @property
    def ratio(self) -> int:
        return self.middle // self.first

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.first, self.middle, self.third)


def gp_triples(vertices: Iterable[int]) -> list[GpTriple]:
    """Every (a, ar, ar^2) with integer r >= 2 and all three members in ``vertices``."""
    members = set(vertices)
    found = []
    for third in members:
        # third = a * r^2 with r >= 2, so r <= sqrt(third)
        for r in range(2, isqrt(third) + 1):
            square = r * r
            if third % square:
                continue
            first = third // square
            if first in members and first * r in members:
                found.append(GpTriple(first, first * r, third))
    return sorted(found)


class _GpFreeSolver:
    """
    Joint (maximum size, count) of subsets avoiding every hyperedge.

    A state is (free, edges): ``free`` holds undecided vertices, ``edges``
    the still-open constraints restricted to undecided members. A constraint
    shrunk to one vertex forces that vertex out.
    """

    def __init__(self, size: int, edges: list[int]):
        self.size = size
        self.root_edges = frozenset(edges)
        self.memo: dict[tuple[int, frozenset], tuple[int, int]] = {}

    def solve(self) -> tuple[int, int]:
        return self._solve((1 << self.size) - 1, self.root_edges)

    @staticmethod
    def _exclude(free: int, edges: frozenset, vertex: int) -> tuple[int, frozenset]:
        bit = 1 << vertex
        return free & ~bit, frozenset(e for e in edges if not e & bit)

    def _include(self, free: int, edges: frozenset, vertex: int) -> tuple[int, frozenset]:
        bit = 1 << vertex
        free &= ~bit
        kept = set()
        forced = 0
        for e in edges:
            if e & bit:
                rest = e & ~bit
                if rest.bit_count() == 1:
                    forced |= rest
                else:
                    kept.add(rest)
            else:
                kept.add(e)
        if forced:
            free &= ~forced
            kept = {e for e in kept if not e & forced}
        return free, frozenset(kept)

    def _solve(self, free: int, edges: frozenset) -> tuple[int, int]:
        if not edges:
            k = free.bit_count()
            return k, 1 << k
        key = (free, edges)
        cached = self.memo.get(key)
        if cached is not None:
            return cached

        covered = 0
        for e in edges:
            covered |= e
        loose = (free & ~covered).bit_count()
        parts = self._parts(covered, edges)

        if len(parts) > 1:
            size, count = loose, 1 << loose
            for part_mask, part_edges in parts:
                part_size, part_count = self._solve(part_mask, part_edges)
                size += part_size
                count *= part_count
            result = (size, count)
        else:
            vertex = self._pivot(covered, edges)
            out_size, out_count = self._solve(*self._exclude(covered, edges, vertex))
            in_size, in_count = self._solve(*self._include(covered, edges, vertex))
            best = max(in_size + 1, out_size)
            result = (loose + best, (in_count + out_count) << loose)
        self.memo[key] = result
        return result

    @staticmethod
    def _pivot(covered: int, edges: frozenset) -> int:
        best, best_hits = -1, -1
        for v in iter_bits(covered):
            bit = 1 << v
            hits = sum(1 for e in edges if e & bit)
            if hits > best_hits:
                best, best_hits = v, hits
        return best

    @staticmethod
    def _parts(covered: int, edges: frozenset) -> list[tuple[int, frozenset]]:
        remaining = set(edges)
        parts = []
        while remaining:
            seed = remaining.pop()
            mask = seed
            group = [seed]
            grew = True
            while grew:
                grew = False
                for e in list(remaining):
                    if e & mask:
                        remaining.discard(e)
                        group.append(e)
                        mask |= e
                        grew = True
            parts.append((mask, frozenset(group)))
        return parts


def _profile(
    vertices: Iterable[int],
    limits: Optional[KernelSettings],
    what: str,
    pairs: Iterable[tuple[int, int]] = (),
) -> tuple[int, int]:
    labels = sorted(set(vertices))
    limits = limits or default_limits()
    check_size(len(labels), limits.max_vertices, what)
    position = {v: k for k, v in enumerate(labels)}
    edges = [
        (1 << position[g.first]) | (1 << position[g.middle]) | (1 << position[g.third])
        for g in gp_triples(labels)
    ]
    edges += [(1 << position[a]) | (1 << position[b]) for a, b in pairs]
    return _GpFreeSolver(len(labels), edges).solve()


def gp_free_profile(
    vertices: Iterable[int],
    limits: Optional[KernelSettings] = None,
    pairs: Iterable[tuple[int, int]] = (),
) -> tuple[int, int]:
    """
    (largest GP-free subset size, number of GP-free subsets) in one pass.

    ``pairs`` adds two-element constraints, e.g. {r, r*r} once 1 is chosen.
    """
    return _profile(vertices, limits, "gp_free_profile", pairs)


def gp_free_max(vertices: Iterable[int], limits: Optional[KernelSettings] = None) -> int:
    return _profile(vertices, limits, "gp_free_max")[0]


def gp_free_count(
    vertices: Iterable[int], limits: Optional[KernelSettings] = None
) -> int:
    return _profile(vertices, limits, "gp_free_count")[1]


def gp_free_max_model(
    vertices: Iterable[int], limits: Optional[KernelSettings] = None
) -> int:
    """
    Largest GP-free subset by CP-SAT, for label sets past the search kernel's guard.

    Each progression contributes x_a + x_ar + x_ar^2 <= 2; only a proven
    optimum is returned.
    """
    labels = sorted(set(vertices))
    limits = limits or default_limits()
    if not labels:
        return 0
    model = cp_model.CpModel()
    chosen = {v: model.NewBoolVar(f"x_{v}") for v in labels}
    for g in gp_triples(labels):
        model.Add(chosen[g.first] + chosen[g.middle] + chosen[g.third] <= 2)
    model.Maximize(sum(chosen.values()))

    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = float(limits.solver_time_limit)
    solver.parameters.num_workers = limits.solver_workers
    status = solver.Solve(model)
    if status != cp_model.OPTIMAL:
        raise KernelBudgetError(
            f"gp_free_max_model: no proven optimum for {len(labels)} labels within "
            f"{limits.solver_time_limit} s ({solver.StatusName(status)})"
        )
    return round(solver.ObjectiveValue())
