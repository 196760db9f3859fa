"""Schedulers: exact DP over zero-indegree signatures, Kahn baseline, evaluator.

The DP keeps one (partial schedule, live bytes, peak bytes) entry per distinct
zero-indegree set per search step. With no budget it returns the minimum
achievable peak over all topological orderings; with a budget it prunes
candidate extensions whose running peak exceeds the budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .graph import Graph, GraphError


@dataclass(frozen=True)
class TraceRow:
    step: int
    node: int
    live_after_alloc: int
    live_after_free: int
    peak_so_far: int


@dataclass
class SearchStats:
    candidates_explored: int = 0
    distinct_signatures: int = 0
    # Work measure: each candidate extension costs Theta(|V|) bitset/free-list
    # operations, so partitioned searches win on this even when raw candidate
    # counts are additive across serially composed regions.
    extension_ops: int = 0


@dataclass
class Solution:
    order: list[int]
    peak_bytes: int
    trace: list[TraceRow]
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class NoSolution:
    budget: int
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class Timeout:
    step: int
    elapsed: float
    stats: SearchStats = field(default_factory=SearchStats)


Outcome = Solution | NoSolution | Timeout


class _Accounting:
    """Precomputed masks for incremental alloc/free over node-index bitsets."""

    def __init__(self, g: Graph):
        self.g = g
        n = len(g.nodes)
        self.n = n
        idx = g.index_of
        self.pred_mask = [0] * n
        for nid, k in idx.items():
            for p in g.preds[nid]:
                self.pred_mask[k] |= 1 << idx[p]
        self.succ_idx = [[idx[s] for s in g.succs[nid]] for nid in g.id_of]

        # Direct allocation bytes per node (0 for views, inputs, group nodes).
        self.alloc_bytes = [0] * n
        self.is_input = [False] * n
        for nid, k in idx.items():
            node = g.nodes[nid]
            self.is_input[k] = node.op == "input"
            if not self.is_input[k]:
                self.alloc_bytes[k] = g.tensor_bytes(nid)

        # Group charging: group_of[k] -> (group mask, total bytes).
        self.group_mask: dict[int, tuple[int, int]] = {}
        for grp in g.groups.values():
            mask = 0
            for m in grp.members | {grp.representative}:
                mask |= 1 << idx[m]
            for m in grp.members | {grp.representative}:
                self.group_mask[idx[m]] = (mask, grp.total_bytes)

        # Free lists: when node k runs, which tensors may die, and their bytes.
        # A tensor dies when all of its effective consumers are scheduled.
        self.free_candidates: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        for nid, k in idx.items():
            if g.is_immortal(nid):
                continue
            eff = g.effective_consumers(nid)
            if not eff:
                continue
            eff_mask = 0
            for c in eff:
                eff_mask |= 1 << idx[c]
            node = g.nodes[nid]
            if node.alloc_group is not None:
                grp = g.groups[node.alloc_group]
                if nid != grp.representative:
                    continue  # group freed via its representative only
                nbytes = grp.total_bytes
            else:
                nbytes = g.tensor_bytes(nid)
            if nbytes == 0:
                continue
            for c in eff:
                self.free_candidates[idx[c]].append((k, eff_mask, nbytes))

        self.mu0 = g.input_bytes()
        self.full_mask = (1 << n) - 1
        self.frontier0 = 0
        for k in range(n):
            if self.pred_mask[k] == 0:
                self.frontier0 |= 1 << k

    def extend(self, mask: int, mu: int, k: int) -> tuple[int, int, int]:
        """Schedule node index k on top of `mask`; returns (mask', mu_alloc, mu')."""
        new_mask = mask | (1 << k)
        alloc = self.alloc_bytes[k]
        if k in self.group_mask:
            gmask, gtotal = self.group_mask[k]
            if mask & gmask == 0:
                alloc += gtotal  # first group node charges the shared buffer
        mu_alloc = mu + alloc
        mu_new = mu_alloc
        for owner, eff_mask, nbytes in self.free_candidates[k]:
            owner_alive = (new_mask >> owner) & 1 or self.is_input[owner]
            if owner_alive and eff_mask & ~new_mask == 0:
                mu_new -= nbytes
        return new_mask, mu_alloc, mu_new

    def next_frontier(self, frontier: int, mask_new: int, k: int) -> int:
        z = frontier & ~(1 << k)
        for s in self.succ_idx[k]:
            if self.pred_mask[s] & ~mask_new == 0:
                z |= 1 << s
        return z


def _bits(mask: int):
    k = 0
    while mask:
        if mask & 1:
            yield k
        mask >>= 1
        k += 1


def schedule_dp(
    g: Graph,
    budget: int | None = None,
    step_time_limit: float | None = None,
    mu0_extra: int = 0,
    stats: SearchStats | None = None,
) -> Outcome:
    """Optimal-peak scheduling via DP over zero-indegree signatures.

    `mu0_extra` pre-charges bytes that are live before the first step (used by
    the divide-and-conquer combiner for boundary tensors already in memory).
    """
    if budget is not None and budget <= 0:
        raise ValueError("budget must be positive")
    acc = _Accounting(g)
    stats = stats if stats is not None else SearchStats()
    n = acc.n
    mu0 = acc.mu0 + mu0_extra

    # signature (frontier mask) -> (mask, mu, mu_peak, schedule tuple)
    entries: dict[int, tuple[int, int, int, tuple[int, ...]]] = {
        acc.frontier0: (0, mu0, mu0, ())
    }
    stats.distinct_signatures += 1

    for step in range(n):
        step_start = time.monotonic()
        nxt: dict[int, tuple[int, int, int, tuple[int, ...]]] = {}
        for sig in sorted(entries):
            mask, mu, mu_peak, sched = entries[sig]
            for k in _bits(sig):
                stats.candidates_explored += 1
                stats.extension_ops += n
                new_mask, mu_alloc, mu_new = acc.extend(mask, mu, k)
                new_peak = max(mu_peak, mu_alloc)
                if budget is not None and new_peak > budget:
                    continue
                new_sig = acc.next_frontier(sig, new_mask, k)
                new_sched = sched + (g.id_of[k],)
                old = nxt.get(new_sig)
                if (
                    old is None
                    or new_peak < old[2]
                    or (new_peak == old[2] and new_sched < old[3])
                ):
                    if old is None:
                        stats.distinct_signatures += 1
                    nxt[new_sig] = (new_mask, mu_new, new_peak, new_sched)
            if step_time_limit is not None:
                elapsed = time.monotonic() - step_start
                if elapsed > step_time_limit:
                    return Timeout(step=step, elapsed=elapsed, stats=stats)
        if not nxt:
            # Only budget pruning can empty a step: the frontier of any proper
            # downset of an acyclic graph is nonempty.
            assert budget is not None
            return NoSolution(budget=budget, stats=stats)
        entries = nxt

    (final,) = entries.values()
    order = list(final[3])
    peak, trace = evaluate_schedule(order, g, mu0_extra=mu0_extra)
    assert peak == final[2], "incremental peak disagrees with evaluator"
    return Solution(order=order, peak_bytes=peak, trace=trace, stats=stats)


def kahn_schedule(g: Graph) -> list[int]:
    """FIFO Kahn ordering; ascending-id tie-break on initial and readied nodes."""
    from collections import deque

    indeg = dict(g.indegree)
    queue = deque(sorted(i for i in g.nodes if indeg[i] == 0))
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        ready = []
        for v in g.succs[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
        for v in sorted(ready):
            queue.append(v)
    return order


def evaluate_schedule(
    order: list[int], g: Graph, mu0_extra: int = 0
) -> tuple[int, list[TraceRow]]:
    """Peak bytes and footprint trace for an arbitrary topological ordering."""
    if sorted(order) != sorted(g.nodes):
        raise GraphError("order is not a permutation of the node set")
    acc = _Accounting(g)
    seen = set()
    for nid in order:
        for p in g.preds[nid]:
            if p not in seen:
                raise GraphError(f"order is not topological at node {nid}")
        seen.add(nid)

    mask = 0
    mu = acc.mu0 + mu0_extra
    peak = mu
    trace = []
    for step, nid in enumerate(order):
        k = g.index_of[nid]
        mask, mu_alloc, mu = acc.extend(mask, mu, k)
        peak = max(peak, mu_alloc)
        trace.append(
            TraceRow(
                step=step,
                node=nid,
                live_after_alloc=mu_alloc,
                live_after_free=mu,
                peak_so_far=peak,
            )
        )
    return peak, trace
