"""Graph IR: validated DAG of operator nodes with byte-size and liveness semantics.

The footprint model is activation-only. Concat nodes are zero-copy views
(their inputs stay live until every consumer reachable through the view chain
has executed). Nodes carrying an ``alloc_group`` share one buffer: the group's
bytes are charged once when the first group node executes and released when the
representative's output dies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

OP_KINDS = frozenset(
    {
        "conv",
        "depthwise_conv",
        "concat",
        "add",
        "relu",
        "pool",
        "identity",
        "input",
        "output",
        "partial_conv",
        "partial_depthwise_conv",
        "opaque",
    }
)

_TOP_LEVEL_KEYS = {"name", "nodes", "edges"}
_NODE_KEYS = {"id", "op", "output_shape", "dtype_bytes", "attrs", "alloc_group"}


class GraphError(ValueError):
    """Raised for malformed or inconsistent graph documents."""


@dataclass(frozen=True)
class Node:
    id: int
    op: str
    output_shape: tuple[int, ...]
    dtype_bytes: int
    attrs: dict = field(default_factory=dict)
    alloc_group: str | None = None

    @property
    def logical_bytes(self) -> int:
        """Size of the node's output tensor, ignoring view/group sharing."""
        return math.prod(self.output_shape) * self.dtype_bytes


@dataclass(frozen=True)
class AllocGroup:
    group_id: str
    total_bytes: int
    members: frozenset[int]  # the partial nodes writing into the buffer
    representative: int  # collector node whose consumers define the lifetime


class Graph:
    """Immutable DAG; all derived maps are computed at construction."""

    def __init__(self, name: str, nodes: list[Node], edges: list[tuple[int, int]]):
        self.name = name
        self.nodes: dict[int, Node] = {}
        for n in nodes:
            if n.id < 0:
                raise GraphError(f"negative node id {n.id}")
            if n.id in self.nodes:
                raise GraphError(f"duplicate node id {n.id}")
            if n.op not in OP_KINDS:
                raise GraphError(f"unknown op_kind {n.op!r} on node {n.id}")
            if not n.output_shape or any(d <= 0 for d in n.output_shape):
                raise GraphError(f"missing/non-positive shape on node {n.id}")
            if n.dtype_bytes <= 0:
                raise GraphError(f"non-positive dtype_bytes on node {n.id}")
            if n.op.startswith("partial_") and n.alloc_group is None:
                raise GraphError(f"partial node {n.id} lacks alloc_group")
            self.nodes[n.id] = n
        if not self.nodes:
            raise GraphError("graph has no nodes")

        self.edges: list[tuple[int, int]] = []
        seen = set()
        self.preds: dict[int, list[int]] = {i: [] for i in self.nodes}
        self.succs: dict[int, list[int]] = {i: [] for i in self.nodes}
        for src, dst in edges:
            if src not in self.nodes or dst not in self.nodes:
                raise GraphError(f"dangling edge ({src}, {dst})")
            if src == dst:
                raise GraphError(f"self-edge on node {src}")
            if (src, dst) in seen:
                raise GraphError(f"duplicate edge ({src}, {dst})")
            seen.add((src, dst))
            self.edges.append((src, dst))
            self.preds[dst].append(src)
            self.succs[src].append(dst)

        self.indegree = {i: len(self.preds[i]) for i in self.nodes}
        self.outdegree = {i: len(self.succs[i]) for i in self.nodes}
        self.sources = [i for i in sorted(self.nodes) if self.indegree[i] == 0]
        self.sinks = [i for i in sorted(self.nodes) if self.outdegree[i] == 0]

        self._check_acyclic()
        self.groups = self._build_groups()

        # Dense index for bitmask work in the scheduler.
        self.index_of = {nid: k for k, nid in enumerate(sorted(self.nodes))}
        self.id_of = sorted(self.nodes)

        self._eff_consumers: dict[int, frozenset[int]] | None = None
        self._immortal: set[int] | None = None

    # -- construction helpers -------------------------------------------------

    def _check_acyclic(self) -> None:
        indeg = dict(self.indegree)
        queue = [i for i in self.nodes if indeg[i] == 0]
        done = 0
        while queue:
            u = queue.pop()
            done += 1
            for v in self.succs[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        if done != len(self.nodes):
            raise GraphError("cycle detected")

    def _build_groups(self) -> dict[str, AllocGroup]:
        by_gid: dict[str, list[int]] = {}
        for n in self.nodes.values():
            if n.alloc_group is not None:
                by_gid.setdefault(n.alloc_group, []).append(n.id)
        groups = {}
        for gid, ids in by_gid.items():
            reps = [i for i in ids if not self.nodes[i].op.startswith("partial_")]
            if len(reps) != 1:
                raise GraphError(f"alloc group {gid!r} needs exactly one collector")
            rep = reps[0]
            members = frozenset(i for i in ids if i != rep)
            for m in members:
                if rep not in self.succs[m]:
                    raise GraphError(
                        f"group {gid!r} member {m} is not a predecessor of {rep}"
                    )
            groups[gid] = AllocGroup(
                group_id=gid,
                total_bytes=self.nodes[rep].logical_bytes,
                members=members,
                representative=rep,
            )
        return groups

    # -- byte accounting ------------------------------------------------------

    def is_view(self, nid: int) -> bool:
        n = self.nodes[nid]
        return n.op == "concat" and n.alloc_group is None

    def tensor_bytes(self, nid: int) -> int:
        """Direct footprint contribution; 0 for views and alloc-group nodes."""
        n = self.nodes[nid]
        if self.is_view(nid) or n.alloc_group is not None:
            return 0
        return n.logical_bytes

    # -- liveness -------------------------------------------------------------

    def effective_consumers(self, nid: int) -> frozenset[int]:
        """Consumers after transitively expanding through concat views."""
        self._compute_liveness()
        return self._eff_consumers[nid]

    def is_immortal(self, nid: int) -> bool:
        """True when the tensor is never freed (sink, output-held, sink view)."""
        self._compute_liveness()
        return nid in self._immortal

    def _compute_liveness(self) -> None:
        if self._eff_consumers is not None:
            return
        eff: dict[int, frozenset[int]] = {}
        immortal: set[int] = set()

        # Reverse topological order so view expansions are already resolved.
        order = topological_ids(self)
        for nid in reversed(order):
            consumers: set[int] = set()
            dead_end = not self.succs[nid]
            for c in self.succs[nid]:
                if self.is_view(c):
                    consumers |= eff[c]
                    if c in immortal:
                        dead_end = True
                else:
                    consumers.add(c)
                    if self.nodes[c].op == "output":
                        dead_end = True
            eff[nid] = frozenset(consumers)
            if dead_end:
                immortal.add(nid)
        self._eff_consumers = eff
        self._immortal = immortal

    def input_bytes(self) -> int:
        """Bytes pre-charged at step 0 for graph-input tensors."""
        return sum(
            self.tensor_bytes(i) for i in self.nodes if self.nodes[i].op == "input"
        )


def topological_ids(g: Graph) -> list[int]:
    """One deterministic topological order (ascending-id Kahn)."""
    import heapq

    indeg = dict(g.indegree)
    heap = [i for i in g.nodes if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        u = heapq.heappop(heap)
        out.append(u)
        for v in g.succs[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    return out


def zero_indegree(scheduled: set[int], g: Graph) -> set[int]:
    """Unscheduled nodes all of whose predecessors are scheduled."""
    for nid in scheduled:
        for p in g.preds[nid]:
            if p not in scheduled:
                raise GraphError(f"scheduled set is not a downset: {nid} before {p}")
    return {
        nid
        for nid in g.nodes
        if nid not in scheduled and all(p in scheduled for p in g.preds[nid])
    }


def recompute_live(g: Graph, prefix: list[int]) -> int:
    """From-scratch live-byte total after executing `prefix`.

    Independent of the scheduler's incremental accounting; used as its oracle.
    """
    done = set()
    for nid in prefix:
        if nid in done:
            raise GraphError(f"node {nid} repeated in prefix")
        for p in g.preds[nid]:
            if p not in done:
                raise GraphError(f"prefix is not topological at node {nid}")
        done.add(nid)

    def dead(nid: int) -> bool:
        if g.is_immortal(nid):
            return False
        return g.effective_consumers(nid) <= done

    total = 0
    for nid, n in g.nodes.items():
        if n.op == "input":
            if not dead(nid):
                total += g.tensor_bytes(nid)  # live from step 0
        elif nid in done and not dead(nid):
            total += g.tensor_bytes(nid)
    for grp in g.groups.values():
        touched = grp.members | {grp.representative}
        if touched & done and not dead(grp.representative):
            total += grp.total_bytes
    return total


# -- serialization ------------------------------------------------------------


def parse_graph(text: str) -> Graph:
    """Parse and validate a graph JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphError(f"malformed JSON: {e}") from e
    if not isinstance(doc, dict):
        raise GraphError("top-level document must be an object")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise GraphError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("name", "nodes", "edges"):
        if key not in doc:
            raise GraphError(f"missing top-level key {key!r}")
    nodes = []
    for nd in doc["nodes"]:
        if not isinstance(nd, dict):
            raise GraphError("node entries must be objects")
        unknown = set(nd) - _NODE_KEYS
        if unknown:
            raise GraphError(f"unknown node keys: {sorted(unknown)}")
        for key in ("id", "op", "output_shape", "dtype_bytes"):
            if key not in nd:
                raise GraphError(f"node missing key {key!r}")
        nodes.append(
            Node(
                id=nd["id"],
                op=nd["op"],
                output_shape=tuple(nd["output_shape"]),
                dtype_bytes=nd["dtype_bytes"],
                attrs=dict(nd.get("attrs", {})),
                alloc_group=nd.get("alloc_group"),
            )
        )
    edges = [(e[0], e[1]) for e in doc["edges"]]
    return Graph(doc["name"], nodes, edges)


def graph_to_json(g: Graph) -> str:
    nodes = []
    for nid in sorted(g.nodes):
        n = g.nodes[nid]
        nd = {
            "id": n.id,
            "op": n.op,
            "output_shape": list(n.output_shape),
            "dtype_bytes": n.dtype_bytes,
            "attrs": n.attrs,
        }
        if n.alloc_group is not None:
            nd["alloc_group"] = n.alloc_group
        nodes.append(nd)
    doc = {"name": g.name, "nodes": nodes, "edges": [list(e) for e in sorted(g.edges)]}
    return json.dumps(doc, indent=2, sort_keys=True)


def load_graph(path: str) -> Graph:
    with open(path) as f:
        return parse_graph(f.read())
