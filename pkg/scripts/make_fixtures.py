#!/usr/bin/env python3
"""Regenerate the JSON graph fixtures under fixtures/.

All fixtures are deterministic; re-running must be a no-op diff-wise.
The cellnet fixture mimics the stacked-cell topology of NAS-style networks:
62 nodes whose concat+conv / concat+depthconv regions rewrite to 92 nodes.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from memsched.graph import Graph, Node, graph_to_json  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def simple(sizes: dict[int, int], edges, name):
    nodes = [
        Node(id=i, op="opaque", output_shape=(s,), dtype_bytes=1)
        for i, s in sizes.items()
    ]
    return Graph(name, nodes, edges)


def chain():
    return simple({0: 3, 1: 5, 2: 2}, [(0, 1), (1, 2)], "chain")


def twochain():
    return simple(
        {0: 10, 1: 50, 2: 1, 3: 40, 4: 1, 5: 1},
        [(0, 1), (1, 2), (0, 3), (3, 4), (2, 5), (4, 5)],
        "twochain",
    )


def diamond():
    return simple({0: 10, 1: 20, 2: 5, 3: 8}, [(0, 1), (0, 2), (1, 3), (2, 3)], "diamond")


def stacked_diamonds():
    # A -> {B, C} -> M -> {D, E} -> Z
    return simple(
        {0: 4, 1: 6, 2: 3, 3: 5, 4: 7, 5: 2, 6: 4},
        [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)],
        "stacked_diamonds",
    )


def rewrite_conv_pair():
    """Two 4096-byte branches into concat+conv: region cost 10240 -> 6144."""
    nodes = [
        Node(0, "identity", (16, 8, 8), 4),
        Node(1, "identity", (16, 8, 8), 4),
        Node(2, "concat", (32, 8, 8), 4, {"channel_axis": 0}),
        Node(3, "conv", (8, 8, 8), 4, {"kh": 1, "kw": 1}),
    ]
    return Graph("rewrite_conv_pair", nodes, [(0, 2), (1, 2), (2, 3)])


def rewrite_depthconv_pair():
    nodes = [
        Node(0, "identity", (16, 8, 8), 4),
        Node(1, "identity", (16, 8, 8), 4),
        Node(2, "concat", (32, 8, 8), 4, {"channel_axis": 0}),
        Node(3, "depthwise_conv", (32, 8, 8), 4, {"kh": 3, "kw": 3, "padding": "same"}),
    ]
    return Graph("rewrite_depthconv_pair", nodes, [(0, 2), (1, 2), (2, 3)])


def cellnet():
    """62-node stacked-cell network; rewriting its 8 patterns yields 92 nodes."""
    nodes: list[Node] = []
    edges: list[tuple[int, int]] = []
    nid = 0

    def add(op, shape, attrs=None):
        nonlocal nid
        nodes.append(Node(nid, op, tuple(shape), 4, dict(attrs or {})))
        nid += 1
        return nid - 1

    def unit(head: int, branches: int, kind: str) -> int:
        """conv/depthconv following a concat of `branches` 4-channel branches."""
        bs = []
        for _ in range(branches):
            b = add("conv", (4, 8, 8), {"kh": 1, "kw": 1})
            edges.append((head, b))
            bs.append(b)
        cat = add("concat", (4 * branches, 8, 8), {"channel_axis": 0})
        for b in bs:
            edges.append((b, cat))
        if kind == "conv":
            op = add("conv", (4, 8, 8), {"kh": 1, "kw": 1})
        else:
            op = add(
                "depthwise_conv",
                (4 * branches, 8, 8),
                {"kh": 3, "kw": 3, "padding": "same"},
            )
        edges.append((cat, op))
        return op

    inp = add("input", (4, 8, 8))
    head = inp
    # (branch count, kind) per unit, grouped into three cells
    cells = [
        [(5, "conv"), (5, "depthwise_conv"), (5, "conv")],
        [(5, "depthwise_conv"), (5, "conv"), (4, "depthwise_conv")],
        [(5, "conv"), (4, "depthwise_conv")],
    ]
    for cell in cells:
        entry = add("conv", (4, 8, 8), {"kh": 1, "kw": 1})
        edges.append((head, entry))
        head = entry
        for branches, kind in cell:
            head = unit(head, branches, kind)
        shape = nodes[-1].output_shape
        tail = add("relu", shape)
        edges.append((head, tail))
        head = tail
    out = add("output", nodes[-1].output_shape, {})
    edges.append((head, out))
    g = Graph("cellnet", nodes, edges)
    assert len(g.nodes) == 62, len(g.nodes)
    return g


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    for build in (
        chain,
        twochain,
        diamond,
        stacked_diamonds,
        rewrite_conv_pair,
        rewrite_depthconv_pair,
        cellnet,
    ):
        g = build()
        path = os.path.join(FIXTURES, f"{g.name}.json")
        with open(path, "w") as f:
            f.write(graph_to_json(g) + "\n")
        print(f"wrote {path} ({len(g.nodes)} nodes)")


if __name__ == "__main__":
    main()
