"""Identity graph rewriting: concat+conv and concat+depthwise_conv patterns.

Channel-wise partitioning splits a convolution over the concat branches into
partial convolutions accumulating into one shared output buffer; kernel-wise
partitioning splits a depthwise convolution per branch, each partial writing
its channel slice in place. Both keep the arithmetic identical and shorten the
branch-input lifetimes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph, Node, topological_ids


@dataclass(frozen=True)
class RewriteMatch:
    kind: str  # 'channel_wise_conv' | 'kernel_wise_depthconv'
    concat_id: int
    op_id: int
    branch_inputs: tuple[int, ...]  # concat inputs, in concat edge order
    branch_channels: tuple[int, ...]


def _channel_axis(node: Node) -> int:
    return int(node.attrs.get("channel_axis", 0))


def match_patterns(g: Graph) -> list[RewriteMatch]:
    """All rewritable concat+conv / concat+depthconv regions, by concat id."""
    matches = []
    for cid in sorted(g.nodes):
        cnode = g.nodes[cid]
        if cnode.op != "concat" or cnode.alloc_group is not None:
            continue
        branches = g.preds[cid]
        if len(branches) < 2:
            continue
        consumers = g.succs[cid]
        # A concat shared with any other consumer cannot be substituted
        # without changing that consumer's input liveness.
        if len(consumers) != 1:
            continue
        op_id = consumers[0]
        op = g.nodes[op_id]
        if op.op not in ("conv", "depthwise_conv"):
            continue
        if g.preds[op_id] != [cid]:
            continue  # the concat must be the op's sole data input
        axis = _channel_axis(cnode)
        chans = tuple(g.nodes[b].output_shape[axis] for b in branches)
        if sum(chans) != cnode.output_shape[axis]:
            continue
        kind = "channel_wise_conv" if op.op == "conv" else "kernel_wise_depthconv"
        if kind == "kernel_wise_depthconv":
            # depthwise: output channels mirror input channels
            if op.output_shape[_channel_axis(op)] != cnode.output_shape[axis]:
                continue
        matches.append(
            RewriteMatch(
                kind=kind,
                concat_id=cid,
                op_id=op_id,
                branch_inputs=tuple(branches),
                branch_channels=chans,
            )
        )
    return matches


def apply_rewrite(g: Graph, m: RewriteMatch) -> Graph:
    """Substitute one match; node ids above the current maximum are assigned
    to the new partial and collector nodes in branch order."""
    op = g.nodes[m.op_id]
    gid = f"rw{m.op_id}"
    next_id = max(g.nodes) + 1
    kernel_attrs = {
        k: v for k, v in op.attrs.items() if k in ("kh", "kw", "padding")
    }

    new_nodes: list[Node] = []
    new_edges: list[tuple[int, int]] = []
    partial_ids = []
    lo = 0
    for branch, ch in zip(m.branch_inputs, m.branch_channels):
        pid = next_id
        next_id += 1
        partial_ids.append(pid)
        if m.kind == "channel_wise_conv":
            pop = "partial_conv"
            shape = op.output_shape  # full-size partial sum
        else:
            pop = "partial_depthwise_conv"
            axis = _channel_axis(op)
            shape = tuple(
                ch if d == axis else op.output_shape[d]
                for d in range(len(op.output_shape))
            )
        new_nodes.append(
            Node(
                id=pid,
                op=pop,
                output_shape=shape,
                dtype_bytes=op.dtype_bytes,
                attrs=dict(
                    kernel_attrs,
                    src_op=m.op_id,
                    in_lo=lo,
                    in_hi=lo + ch,
                ),
                alloc_group=gid,
            )
        )
        new_edges.append((branch, pid))
        lo += ch

    collector_id = next_id
    collector_op = "add" if m.kind == "channel_wise_conv" else "concat"
    new_nodes.append(
        Node(
            id=collector_id,
            op=collector_op,
            output_shape=op.output_shape,
            dtype_bytes=op.dtype_bytes,
            attrs={"replaces": m.op_id, "channel_axis": _channel_axis(op)},
            alloc_group=gid,
        )
    )
    for pid in partial_ids:
        new_edges.append((pid, collector_id))

    removed = {m.concat_id, m.op_id}
    nodes = [n for nid, n in g.nodes.items() if nid not in removed] + new_nodes
    edges = []
    for s, d in g.edges:
        if s in removed and d in removed:
            continue
        if d == m.concat_id:
            continue  # branch -> concat replaced by branch -> partial
        if s == m.op_id:
            edges.append((collector_id, d))  # collector adopts op's consumers
        else:
            edges.append((s, d))
    edges.extend(new_edges)
    return Graph(g.name, nodes, edges)


def rewrite_all(g: Graph) -> tuple[Graph, list[RewriteMatch]]:
    """Apply non-overlapping matches greedily in topological order to fixpoint."""
    applied: list[RewriteMatch] = []
    while True:
        matches = match_patterns(g)
        if not matches:
            return g, applied
        # One match per pass: a later match may name nodes a substitution just
        # replaced, so re-match on the rewritten graph each time.
        pos = {nid: i for i, nid in enumerate(topological_ids(g))}
        m = min(matches, key=lambda m: pos[m.concat_id])
        g = apply_rewrite(g, m)
        applied.append(m)
