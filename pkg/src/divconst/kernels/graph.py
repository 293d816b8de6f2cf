from dataclasses import dataclass
from typing import Iterable, Iterator

import networkx as nx

from ..config_utils import KernelSettings


class KernelBudgetError(Exception):
    pass


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def component_masks(adjacency: tuple[int, ...], mask: int) -> list[int]:
    """Split ``mask`` into the vertex masks of its connected components."""
    components = []
    while mask:
        seed = mask & -mask
        component = seed
        frontier = seed
        while frontier:
            reach = 0
            for v in iter_bits(frontier):
                reach |= adjacency[v]
            frontier = reach & mask & ~component
            component |= frontier
        components.append(component)
        mask &= ~component
    return components


@dataclass(frozen=True)
class SmallGraph:
    """
    Undirected simple graph on sorted integer labels.

    ``adjacency[k]`` is the bitset of neighbours of ``vertices[k]`` over the
    local indices 0..len(vertices)-1.
    """

    vertices: tuple[int, ...]
    adjacency: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.adjacency):
            raise ValueError("vertices and adjacency must have the same length")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.vertices)) - 1

    @property
    def edges(self) -> set[tuple[int, int]]:
        pairs = set()
        for k, nbrs in enumerate(self.adjacency):
            for j in iter_bits(nbrs):
                if k < j:
                    pairs.add((self.vertices[k], self.vertices[j]))
        return pairs

    def induced(self, mask: int) -> "SmallGraph":
        """Induced subgraph on the local indices in ``mask``, relabelled locally."""
        keep = list(iter_bits(mask))
        position = {old: new for new, old in enumerate(keep)}
        adjacency = []
        for old in keep:
            nbrs = 0
            for j in iter_bits(self.adjacency[old] & mask):
                nbrs |= 1 << position[j]
            adjacency.append(nbrs)
        return SmallGraph(tuple(self.vertices[k] for k in keep), tuple(adjacency))

    def components(self) -> list["SmallGraph"]:
        return [self.induced(m) for m in component_masks(self.adjacency, self.full_mask)]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph

    @classmethod
    def from_edges(
        cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]]
    ) -> "SmallGraph":
        labels = tuple(sorted(set(vertices)))
        position = {v: k for k, v in enumerate(labels)}
        adjacency = [0] * len(labels)
        for u, v in edges:
            if u == v:
                continue
            adjacency[position[u]] |= 1 << position[v]
            adjacency[position[v]] |= 1 << position[u]
        return cls(labels, tuple(adjacency))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "SmallGraph":
        return cls.from_edges(graph.nodes, graph.edges)


EMPTY_GRAPH = SmallGraph((), ())


def check_size(graph_size: int, limit: int, what: str) -> None:
    if graph_size > limit:
        raise KernelBudgetError(
            f"{what}: {graph_size} vertices exceeds the configured limit of {limit}"
        )


def default_limits() -> KernelSettings:
    return KernelSettings()
