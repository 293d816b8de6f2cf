from dataclasses import dataclass
from typing import Optional

from ..config_utils import KernelSettings
from .graph import SmallGraph, check_size, component_masks, default_limits, iter_bits


@dataclass(frozen=True)
class MaxISResult:
    size: int
    count: int


def _pivot(adjacency: tuple[int, ...], mask: int) -> tuple[int, int]:
    """Highest-degree vertex inside ``mask``; ties go to the smallest label."""
    best, best_degree = -1, -1
    for v in iter_bits(mask):
        degree = (adjacency[v] & mask).bit_count()
        if degree > best_degree:
            best, best_degree = v, degree
    return best, best_degree


class _IndependentSetCounter:
    def __init__(self, adjacency: tuple[int, ...]):
        self.adjacency = adjacency
        self.memo: dict[int, int] = {}

    def count(self, mask: int) -> int:
        if mask == 0:
            return 1
        cached = self.memo.get(mask)
        if cached is not None:
            return cached

        parts = component_masks(self.adjacency, mask)
        if len(parts) > 1:
            result = 1
            for part in parts:
                result *= self.count(part)
        else:
            v, degree = _pivot(self.adjacency, mask)
            if degree == 0:
                result = 2
            else:
                bit = 1 << v
                result = self.count(mask & ~bit) + self.count(
                    mask & ~(bit | self.adjacency[v])
                )
        self.memo[mask] = result
        return result


class _MaximumSetCounter:
    def __init__(self, adjacency: tuple[int, ...]):
        self.adjacency = adjacency
        self.memo: dict[int, tuple[int, int]] = {}

    def solve(self, mask: int) -> tuple[int, int]:
        if mask == 0:
            return 0, 1
        cached = self.memo.get(mask)
        if cached is not None:
            return cached

        parts = component_masks(self.adjacency, mask)
        if len(parts) > 1:
            size, count = 0, 1
            for part in parts:
                part_size, part_count = self.solve(part)
                size += part_size
                count *= part_count
            result = (size, count)
        else:
            v, degree = _pivot(self.adjacency, mask)
            if degree == 0:
                result = (1, 1)
            else:
                bit = 1 << v
                out_size, out_count = self.solve(mask & ~bit)
                in_size, in_count = self.solve(mask & ~(bit | self.adjacency[v]))
                in_size += 1
                if in_size == out_size:
                    result = (in_size, in_count + out_count)
                elif in_size > out_size:
                    result = (in_size, in_count)
                else:
                    result = (out_size, out_count)
        self.memo[mask] = result
        return result


def count_independent_sets(
    graph: SmallGraph, limits: Optional[KernelSettings] = None
) -> int:
    """Number of independent vertex subsets of ``graph``, the empty set included."""
    limits = limits or default_limits()
    check_size(len(graph), limits.max_vertices, "count_independent_sets")
    return _IndependentSetCounter(graph.adjacency).count(graph.full_mask)


def max_independent_set(
    graph: SmallGraph, limits: Optional[KernelSettings] = None
) -> MaxISResult:
    """Independence number together with the number of independent sets of that size."""
    limits = limits or default_limits()
    check_size(len(graph), limits.max_vertices, "max_independent_set")
    size, count = _MaximumSetCounter(graph.adjacency).solve(graph.full_mask)
    return MaxISResult(size=size, count=count)
