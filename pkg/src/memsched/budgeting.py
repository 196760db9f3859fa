"""Adaptive soft budgeting: bracketed bisection over the pruning budget.

The hard budget is the Kahn-schedule peak (always feasible). Bisection probes
a soft budget with the time-limited DP: 'no solution' raises the lower bound,
'timeout' lowers the upper bound, and the first 'solution' is returned. When
the bracket exhausts, the Kahn schedule is the fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph
from .scheduler import (
    NoSolution,
    SearchStats,
    Solution,
    Timeout,
    evaluate_schedule,
    kahn_schedule,
    schedule_dp,
)


@dataclass
class BudgetState:
    tau_max: int
    tau_old: int
    tau_new: int
    lo: int
    hi: int
    flag: str  # 'no_solution' | 'timeout' | 'solution'
    step_time_limit: float
    iterations: int
    fallback: bool = False


def _lower_bound(g: Graph) -> int:
    """Trivial lower bound on the optimal peak: largest single allocation."""
    lb = g.input_bytes()
    for nid in g.nodes:
        lb = max(lb, g.tensor_bytes(nid))
    for grp in g.groups.values():
        lb = max(lb, grp.total_bytes)
    return max(lb, 1)


def adaptive_schedule(
    g: Graph,
    step_time_limit: float,
    max_iterations: int = 64,
    stats: SearchStats | None = None,
) -> tuple[list[int], int, BudgetState]:
    """Meta-search for a workable soft budget; never returns empty-handed."""
    if step_time_limit < 0:
        raise ValueError("step_time_limit must be non-negative")
    kahn = kahn_schedule(g)
    tau_max, _ = evaluate_schedule(kahn, g)
    tau_max = max(tau_max, 1)

    state = BudgetState(
        tau_max=tau_max,
        tau_old=tau_max,
        tau_new=tau_max,
        lo=_lower_bound(g),
        hi=tau_max,
        flag="no_solution",
        step_time_limit=step_time_limit,
        iterations=0,
    )

    # First probe at the hard budget itself: on instantly schedulable graphs
    # the meta-search converges in one iteration.
    tau = tau_max
    while state.iterations < max_iterations:
        state.iterations += 1
        state.tau_old, state.tau_new = state.tau_new, tau
        outcome = schedule_dp(g, budget=tau, step_time_limit=step_time_limit, stats=stats)
        if isinstance(outcome, Solution):
            state.flag = "solution"
            return outcome.order, outcome.peak_bytes, state
        if isinstance(outcome, NoSolution):
            state.flag = "no_solution"
            state.lo = tau + 1  # tau below the optimum: raise the bracket
        else:
            assert isinstance(outcome, Timeout)
            state.flag = "timeout"
            state.hi = tau - 1  # too slow at tau: tighten the budget
        if state.lo > state.hi:
            break
        tau = (state.lo + state.hi) // 2

    state.fallback = True
    peak, _ = evaluate_schedule(kahn, g)
    return kahn, peak, state
