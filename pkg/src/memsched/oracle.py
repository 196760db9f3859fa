"""Exhaustive topological-ordering enumeration: ground truth for small graphs."""

from __future__ import annotations

from collections.abc import Iterator
from functools import lru_cache

from .graph import Graph

MAX_ORACLE_NODES = 14


def enumerate_schedules(g: Graph, limit: int | None = None) -> Iterator[list[int]]:
    """Yield every topological ordering exactly once, lexicographically by id."""
    ids = sorted(g.nodes)
    indeg = dict(g.indegree)
    order: list[int] = []
    seen: set[int] = set()

    def rec() -> Iterator[list[int]]:
        if len(order) == len(ids):
            yield list(order)
            return
        for nid in ids:
            if indeg[nid] == 0 and nid not in seen:
                seen.add(nid)
                order.append(nid)
                for v in g.succs[nid]:
                    indeg[v] -= 1
                yield from rec()
                for v in g.succs[nid]:
                    indeg[v] += 1
                order.pop()
                seen.discard(nid)

    stream = rec()
    if limit is None:
        yield from stream
    else:
        for count, s in enumerate(stream):
            if count >= limit:
                return
            yield s


def brute_force_optimal(g: Graph) -> tuple[list[int], int]:
    """Minimum peak over *all* topological orderings (exhaustive, no memo).

    Ties resolve to the lexicographically smallest order because the DFS
    expands candidates in ascending id and only strict improvements replace
    the incumbent. Byte accounting is the evaluator's; its correctness is
    checked separately against the from-scratch liveness oracle.
    """
    from .scheduler import _Accounting

    n = len(g.nodes)
    if n > MAX_ORACLE_NODES:
        raise ValueError(f"graph too large for the oracle ({n} > {MAX_ORACLE_NODES})")
    acc = _Accounting(g)
    best: list[tuple[int, ...] | int | None] = [None, None]  # order, peak
    order: list[int] = []

    def rec(mask: int, frontier: int, mu: int, peak: int) -> None:
        if mask == acc.full_mask:
            if best[1] is None or peak < best[1]:
                best[0], best[1] = tuple(order), peak
            return
        f = frontier
        k = 0
        while f:
            if f & 1:
                new_mask, mu_alloc, mu_new = acc.extend(mask, mu, k)
                order.append(g.id_of[k])
                rec(
                    new_mask,
                    acc.next_frontier(frontier, new_mask, k),
                    mu_new,
                    max(peak, mu_alloc),
                )
                order.pop()
            f >>= 1
            k += 1

    rec(0, acc.frontier0, acc.mu0, acc.mu0)
    assert best[0] is not None
    return list(best[0]), best[1]


def count_linear_extensions(g: Graph) -> int:
    """Linear-extension count via a DP over downsets (enumeration cross-check)."""
    n = len(g.nodes)
    pred_mask = [0] * n
    for nid, k in g.index_of.items():
        for p in g.preds[nid]:
            pred_mask[k] |= 1 << g.index_of[p]
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def count(mask: int) -> int:
        if mask == full:
            return 1
        total = 0
        for k in range(n):
            if not mask >> k & 1 and pred_mask[k] & ~mask == 0:
                total += count(mask | (1 << k))
        return total

    result = count(0)
    count.cache_clear()
    return result
