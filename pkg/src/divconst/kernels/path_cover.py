from typing import Optional

from ortools.sat.python import cp_model

from ..config_utils import KernelSettings
from .graph import (
    KernelBudgetError,
    SmallGraph,
    check_size,
    component_masks,
    default_limits,
    iter_bits,
)


def _local_adjacency(adjacency: tuple[int, ...], mask: int) -> list[int]:
    keep = list(iter_bits(mask))
    position = {old: new for new, old in enumerate(keep)}
    local = []
    for old in keep:
        nbrs = 0
        for j in iter_bits(adjacency[old] & mask):
            nbrs |= 1 << position[j]
        local.append(nbrs)
    return local


def subset_dp_cover(adjacency: list[int]) -> int:
    """
    Path cover number by DP over vertex subsets.

    best[S] is the fewest paths covering S when the vertices of S are laid
    out path after path; ends[S] holds every last vertex achieving best[S].
    Appending u continues the current path iff u touches one of those ends.
    """
    k = len(adjacency)
    if k == 0:
        return 0
    size = 1 << k
    best = [0] * size
    ends = [0] * size
    for subset in range(1, size):
        low_value = k + 1
        low_ends = 0
        rest = subset
        while rest:
            bit = rest & -rest
            rest ^= bit
            prev = subset ^ bit
            if prev == 0:
                value = 1
            elif ends[prev] & adjacency[bit.bit_length() - 1]:
                value = best[prev]
            else:
                value = best[prev] + 1
            if value < low_value:
                low_value, low_ends = value, bit
            elif value == low_value:
                low_ends |= bit
        best[subset] = low_value
        ends[subset] = low_ends
    return best[size - 1]


def _endpoint_bound(adjacency: tuple[int, ...], mask: int) -> int:
    """Degree-one vertices of a connected graph end their paths; each path has two ends."""
    leaves = sum(1 for v in iter_bits(mask) if (adjacency[v] & mask).bit_count() == 1)
    return max(1, (leaves + 1) // 2)


def circuit_cover(adjacency: tuple[int, ...], mask: int, limits: KernelSettings) -> int:
    """
    Path cover number of a connected vertex set with CP-SAT.

    Every path is a circuit through an extra depot node: the depot arc into
    a vertex opens a path, the arc back closes it, and the multiple-circuit
    constraint rules out cycles that avoid the depot. Minimising the arcs
    leaving the depot gives the number of paths. Only a proven optimum is
    returned.
    """
    model = cp_model.CpModel()
    node = {v: k + 1 for k, v in enumerate(iter_bits(mask))}
    arcs = []
    opens = []
    for v, k in node.items():
        opening = model.NewBoolVar(f"open_{k}")
        closing = model.NewBoolVar(f"close_{k}")
        opens.append(opening)
        arcs.append((0, k, opening))
        arcs.append((k, 0, closing))
        for u in iter_bits(adjacency[v] & mask):
            arcs.append((k, node[u], model.NewBoolVar(f"arc_{k}_{node[u]}")))
    model.AddMultipleCircuit(arcs)
    model.Add(sum(opens) >= _endpoint_bound(adjacency, mask))
    model.Minimize(sum(opens))

    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = float(limits.solver_time_limit)
    solver.parameters.num_workers = limits.solver_workers
    status = solver.Solve(model)
    if status != cp_model.OPTIMAL:
        raise KernelBudgetError(
            f"min_path_cover: no proven optimum for {len(node)} vertices within "
            f"{limits.solver_time_limit} s ({solver.StatusName(status)})"
        )
    return round(solver.ObjectiveValue())


class _PathCoverSolver:
    def __init__(self, adjacency: tuple[int, ...], limits: KernelSettings):
        self.adjacency = adjacency
        self.limits = limits
        self.memo: dict[int, int] = {}

    def cover(self, mask: int) -> int:
        return sum(self._connected(part) for part in component_masks(self.adjacency, mask))

    def _connected(self, mask: int) -> int:
        size = mask.bit_count()
        if size <= 2:
            return 1
        cached = self.memo.get(mask)
        if cached is not None:
            return cached

        universal = next(
            (
                v for v in iter_bits(mask)
                if self.adjacency[v] & mask == mask & ~(1 << v)
            ),
            None,
        )
        if universal is not None:
            # join the cover of the rest through the universal vertex
            result = max(1, self.cover(mask & ~(1 << universal)) - 1)
        elif size <= self.limits.path_cover_dp_threshold:
            result = subset_dp_cover(_local_adjacency(self.adjacency, mask))
        else:
            result = circuit_cover(self.adjacency, mask, self.limits)
        self.memo[mask] = result
        return result


def min_path_cover(graph: SmallGraph, limits: Optional[KernelSettings] = None) -> int:
    """Fewest vertex-disjoint simple paths covering ``graph``; 0 for the empty graph."""
    limits = limits or default_limits()
    check_size(len(graph), limits.path_cover_max_vertices, "min_path_cover")
    return _PathCoverSolver(graph.adjacency, limits).cover(graph.full_mask)
