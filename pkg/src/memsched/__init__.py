"""Memory-aware scheduling toolchain for irregularly wired dataflow graphs."""

from .graph import (
    Graph,
    GraphError,
    Node,
    graph_to_json,
    load_graph,
    parse_graph,
    recompute_live,
    zero_indegree,
)
from .scheduler import (
    NoSolution,
    Solution,
    Timeout,
    evaluate_schedule,
    kahn_schedule,
    schedule_dp,
)
from .budgeting import adaptive_schedule
from .oracle import brute_force_optimal, enumerate_schedules
from .partition import conquer_and_combine, find_cut_nodes, partition
from .rewrite import apply_rewrite, match_patterns, rewrite_all
from .refexec import equivalence_check, execute
from .memsim import arena_assign, belady_traffic

__all__ = [
    "Graph",
    "GraphError",
    "Node",
    "graph_to_json",
    "load_graph",
    "parse_graph",
    "recompute_live",
    "zero_indegree",
    "NoSolution",
    "Solution",
    "Timeout",
    "evaluate_schedule",
    "kahn_schedule",
    "schedule_dp",
    "adaptive_schedule",
    "brute_force_optimal",
    "enumerate_schedules",
    "conquer_and_combine",
    "find_cut_nodes",
    "partition",
    "apply_rewrite",
    "match_patterns",
    "rewrite_all",
    "equivalence_check",
    "execute",
    "arena_assign",
    "belady_traffic",
]
