"""Distribution-sensitive hashing for sublinear maximum-likelihood search.

Pipeline: model a joint symbol distribution, solve the optimal exponent
parameters, build a decision tree of buckets, index database sequences
across permuted bands, and answer queries by scoring bucket collisions.
"""

from .bands import BandIndex, BandSet, assign_a, assign_b, build_index
from .engine import SearchResult, search, search_top1
from .model import (
    Alphabet,
    JointDistribution,
    ProblemDims,
    estimate_from_pairs,
    from_matrix,
    load_model,
    dump_model,
    log_likelihood,
)
from .solver import HashParams, compute_p0_q0, constraint_value, noise_complexity_bound, solve_params
from .tree import (
    DecisionTree,
    FamilyStats,
    NodeStatus,
    TreeNode,
    build_tree,
    complexity_report,
    estimate_family_stats,
    family_stats,
    load_tree,
    save_tree,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BandIndex",
    "BandSet",
    "DecisionTree",
    "FamilyStats",
    "HashParams",
    "JointDistribution",
    "NodeStatus",
    "ProblemDims",
    "SearchResult",
    "TreeNode",
    "assign_a",
    "assign_b",
    "build_index",
    "build_tree",
    "complexity_report",
    "compute_p0_q0",
    "constraint_value",
    "dump_model",
    "estimate_family_stats",
    "estimate_from_pairs",
    "family_stats",
    "from_matrix",
    "load_model",
    "load_tree",
    "log_likelihood",
    "noise_complexity_bound",
    "save_tree",
    "search",
    "search_top1",
    "solve_params",
]
