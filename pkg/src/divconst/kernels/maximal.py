from typing import Optional

from ..config_utils import KernelSettings
from .graph import SmallGraph, check_size, default_limits, iter_bits


class _MaximalSetCounter:
    """
    Counts maximal independent sets by domination branching.

    A state is (choosable, undominated) with choosable a subset of
    undominated. It counts independent sets I inside ``choosable`` that
    dominate every vertex of ``undominated``. Some vertex x of
    ``undominated`` must be dominated, so I meets N[x] within
    ``choosable``; the branches fix the first such member.
    """

    def __init__(self, adjacency: tuple[int, ...]):
        self.adjacency = adjacency
        self.closed = tuple(nbrs | (1 << v) for v, nbrs in enumerate(adjacency))
        self.memo: dict[tuple[int, int], int] = {}

    def _parts(self, choosable: int, undominated: int) -> list[tuple[int, int]]:
        # only edges touching a choosable vertex matter
        live = choosable | undominated
        parts = []
        while live:
            seed = live & -live
            component = seed
            frontier = seed
            while frontier:
                reach = 0
                for v in iter_bits(frontier):
                    if choosable >> v & 1:
                        reach |= self.adjacency[v] & live
                    else:
                        reach |= self.adjacency[v] & choosable
                frontier = reach & ~component
                component |= frontier
            parts.append((choosable & component, undominated & component))
            live &= ~component
        return parts

    def count(self, choosable: int, undominated: int) -> int:
        if undominated == 0:
            return 1
        key = (choosable, undominated)
        cached = self.memo.get(key)
        if cached is not None:
            return cached

        parts = self._parts(choosable, undominated)
        if len(parts) > 1:
            result = 1
            for part_choosable, part_undominated in parts:
                result *= self.count(part_choosable, part_undominated)
                if result == 0:
                    break
        else:
            result = self._branch(choosable, undominated)
        self.memo[key] = result
        return result

    def _branch(self, choosable: int, undominated: int) -> int:
        target, options = -1, -1
        for x in iter_bits(undominated):
            candidates = self.closed[x] & choosable
            width = candidates.bit_count()
            if target < 0 or width < options.bit_count():
                target, options = x, candidates
                if width <= 1:
                    break
        if options == 0:
            return 0

        total = 0
        forbidden = 0
        for u in iter_bits(options):
            reach = self.closed[u]
            total += self.count(
                choosable & ~reach & ~forbidden, undominated & ~reach
            )
            forbidden |= 1 << u
        return total


def count_maximal_independent_sets(
    graph: SmallGraph, limits: Optional[KernelSettings] = None
) -> int:
    """Number of inclusion-maximal independent sets; 1 for the empty graph."""
    limits = limits or default_limits()
    check_size(len(graph), limits.max_vertices, "count_maximal_independent_sets")
    full = graph.full_mask
    return _MaximalSetCounter(graph.adjacency).count(full, full)
