from .graph import EMPTY_GRAPH, KernelBudgetError, SmallGraph, component_masks, iter_bits
from .gp_free import (
    GpTriple,
    gp_free_count,
    gp_free_max,
    gp_free_max_model,
    gp_free_profile,
    gp_triples,
)
from .independent import MaxISResult, count_independent_sets, max_independent_set
from .maximal import count_maximal_independent_sets
from .path_cover import min_path_cover

__all__ = [
    "EMPTY_GRAPH",
    "GpTriple",
    "KernelBudgetError",
    "MaxISResult",
    "SmallGraph",
    "component_masks",
    "count_independent_sets",
    "count_maximal_independent_sets",
    "gp_free_count",
    "gp_free_max",
    "gp_free_max_model",
    "gp_free_profile",
    "gp_triples",
    "iter_bits",
    "max_independent_set",
    "min_path_cover",
]
