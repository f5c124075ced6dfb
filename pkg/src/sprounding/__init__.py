"""Integer roundings of rational edge weights that preserve shortest paths."""

from .graph import (
    LEVELS,
    MODES,
    GraphFormatError,
    RootedTree,
    RoundingChecker,
    VerificationReport,
    WeightedGraph,
    all_pairs_shortest,
    parse_graph,
    serialize_graph,
    verify_rounding,
)
from .paths import round_path
from .tree import (
    ErrorRangeSet,
    all_path_lengths,
    decide,
    error_range_set,
    extract_rounding,
    filter_ranges,
    lift,
    merge,
    minimize_epsilon,
    two_rounding,
)

__version__ = "0.1.0"

__all__ = [
    "LEVELS", "MODES", "GraphFormatError", "RootedTree", "RoundingChecker",
    "VerificationReport", "WeightedGraph", "all_pairs_shortest", "parse_graph",
    "serialize_graph", "verify_rounding", "round_path", "ErrorRangeSet",
    "all_path_lengths", "decide", "error_range_set", "extract_rounding",
    "filter_ranges", "lift", "merge", "minimize_epsilon", "two_rounding",
]
