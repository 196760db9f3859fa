"""Divide-and-conquer over hourglass-shaped graphs.

Cut nodes (nodes on every source-to-sink path) are recovered structurally as
dominators of the sink, so arbitrary IR files partition without any generator
metadata. Each subgraph is scheduled independently with the boundary tensor
pre-charged, and sub-schedules are concatenated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .budgeting import adaptive_schedule
from .graph import Graph, Node, topological_ids
from .scheduler import (
    Outcome,
    SearchStats,
    Solution,
    evaluate_schedule,
    schedule_dp,
)

DEFAULT_MIN_PARTITION_SIZE = 8


@dataclass
class Subgraph:
    node_ids: list[int]  # topological order, boundaries included
    entry: int | None  # boundary node owned by the predecessor subgraph
    exit: int | None


@dataclass
class Partition:
    subgraphs: list[Subgraph]


@dataclass
class SchedulerConfig:
    budget: int | None = None
    step_time_limit: float | None = None
    adaptive: bool = False
    max_iterations: int = 64


@dataclass
class CombinedResult:
    order: list[int]
    peak_bytes: int
    partition_peaks: list[int]
    partition_sizes: list[int]
    stats: SearchStats = field(default_factory=SearchStats)


def _dominators(g: Graph) -> dict[int, set[int]]:
    """Iterative dataflow dominators, relative to a virtual source.

    Source nodes dominate only themselves, so with several sources the meet of
    two source-rooted paths is empty except for the joining node: exactly the
    dominator sets a prepended 0-byte virtual source would give.
    """
    dom: dict[int, set[int]] = {}
    for nid in topological_ids(g):
        preds = g.preds[nid]
        if not preds:
            dom[nid] = {nid}
        else:
            meet = set(dom[preds[0]])
            for p in preds[1:]:
                meet &= dom[p]
            dom[nid] = meet | {nid}
    return dom


def find_cut_nodes(g: Graph) -> list[int]:
    """Nodes through which every source-to-sink path passes, in topo order."""
    dom = _dominators(g)

    # Dominators of the virtual sink = intersection over all real sinks.
    cuts: set[int] | None = None
    for s in g.sinks:
        cuts = set(dom[s]) if cuts is None else cuts & dom[s]
    assert cuts is not None

    if len(g.sources) > 1:
        # A cut must lie on paths from *every* source, i.e. every source is an
        # ancestor of it.
        ancestors = _ancestor_sets(g)
        cuts = {c for c in cuts if all(src in ancestors[c] for src in g.sources)}

    pos = {nid: i for i, nid in enumerate(topological_ids(g))}
    return sorted(cuts, key=lambda c: pos[c])


def _ancestor_sets(g: Graph) -> dict[int, set[int]]:
    anc: dict[int, set[int]] = {}
    for nid in topological_ids(g):
        s: set[int] = set()
        for p in g.preds[nid]:
            s |= anc[p]
            s.add(p)
        anc[nid] = s
    return anc


def _splittable(g: Graph, nid: int) -> bool:
    """Only materialized interior tensors make sound boundaries."""
    n = g.nodes[nid]
    return (
        g.tensor_bytes(nid) > 0
        and n.op not in ("input", "output")
        and n.alloc_group is None
    )


def partition(g: Graph, min_size: int = DEFAULT_MIN_PARTITION_SIZE) -> Partition:
    """Split at interior cut nodes; merge undersized segments with a neighbor."""
    cuts = [c for c in find_cut_nodes(g) if _splittable(g, c)]
    topo = topological_ids(g)
    pos = {nid: i for i, nid in enumerate(topo)}
    anc = _ancestor_sets(g)

    interior = [c for c in cuts if g.preds[c] and g.succs[c]]
    if not interior:
        return Partition([Subgraph(node_ids=list(topo), entry=None, exit=None)])

    # Assign each node to the segment opened by its nearest dominating cut.
    boundaries: list[int | None] = [None] + interior + [None]
    segments: list[list[int]] = [[] for _ in range(len(interior) + 1)]
    for nid in topo:
        if nid in interior:
            continue
        k = 0
        for j, c in enumerate(interior):
            if c == nid or c in anc[nid]:
                k = j + 1
        segments[k].append(nid)

    subs: list[Subgraph] = []
    for k, seg in enumerate(segments):
        entry = boundaries[k]
        exit_ = boundaries[k + 1]
        ids = ([] if entry is None else [entry]) + seg + (
            [] if exit_ is None else [exit_]
        )
        ids.sort(key=lambda n: pos[n])
        subs.append(Subgraph(node_ids=ids, entry=entry, exit=exit_))

    # Merge segments below the minimum size into their successor (or, for the
    # last one, predecessor). Shared boundary nodes count toward both sides.
    def size(s: Subgraph) -> int:
        return len(s.node_ids)

    merged = list(subs)
    i = 0
    while len(merged) > 1 and i < len(merged):
        if size(merged[i]) >= min_size:
            i += 1
            continue
        if i + 1 < len(merged):
            nxt = merged[i + 1]
            fused = Subgraph(
                node_ids=merged[i].node_ids
                + [n for n in nxt.node_ids if n != nxt.entry],
                entry=merged[i].entry,
                exit=nxt.exit,
            )
            merged[i : i + 2] = [fused]
        else:
            prev = merged[i - 1]
            fused = Subgraph(
                node_ids=prev.node_ids
                + [n for n in merged[i].node_ids if n != merged[i].entry],
                entry=prev.entry,
                exit=merged[i].exit,
            )
            merged[i - 1 : i + 1] = [fused]
            i -= 1
    return Partition(merged)


def extract_subgraph(g: Graph, sub: Subgraph) -> Graph:
    """Induced subgraph; a non-None entry boundary becomes an `input` node."""
    keep = set(sub.node_ids)
    nodes = []
    for nid in sub.node_ids:
        n = g.nodes[nid]
        if nid == sub.entry:
            n = replace(n, op="input", attrs=dict(n.attrs, boundary=1))
        nodes.append(n)
    edges = [(s, d) for s, d in g.edges if s in keep and d in keep]
    return Graph(f"{g.name}/sub", nodes, edges)


def conquer_and_combine(
    g: Graph, p: Partition, config: SchedulerConfig | None = None
) -> Outcome | CombinedResult:
    """Schedule each subgraph, concatenate orders, drop duplicated boundaries."""
    config = config or SchedulerConfig()
    stats = SearchStats()
    order: list[int] = []
    peaks: list[int] = []
    sizes: list[int] = []
    for sub in p.subgraphs:
        sg = extract_subgraph(g, sub)
        if config.adaptive:
            assert config.step_time_limit is not None
            sub_order, sub_peak, _ = adaptive_schedule(
                sg, config.step_time_limit, config.max_iterations, stats=stats
            )
        else:
            outcome = schedule_dp(
                sg,
                budget=config.budget,
                step_time_limit=config.step_time_limit,
                stats=stats,
            )
            if not isinstance(outcome, Solution):
                outcome.stats = stats
                return outcome
            sub_order, sub_peak = outcome.order, outcome.peak_bytes
        peaks.append(sub_peak)
        sizes.append(len(sub_order) - (1 if sub.entry is not None else 0))
        for nid in sub_order:
            if nid != sub.entry:
                order.append(nid)
    peak = max(peaks)
    return CombinedResult(
        order=order,
        peak_bytes=peak,
        partition_peaks=peaks,
        partition_sizes=sizes,
        stats=stats,
    )
