"""Seeded random-graph generators for experiments and the acceptance corpus."""

from __future__ import annotations

import random

from .graph import Graph, Node


def random_dag(
    seed: int,
    n_lo: int = 4,
    n_hi: int = 12,
    edge_prob: float = 0.4,
    size_lo: int = 1,
    size_hi: int = 64,
) -> Graph:
    """Random DAG with byte sizes in [size_lo, size_hi]; edges go id-upward."""
    rng = random.Random(seed)
    n = rng.randint(n_lo, n_hi)
    nodes = [
        Node(
            id=i,
            op="opaque",
            output_shape=(rng.randint(size_lo, size_hi),),
            dtype_bytes=1,
        )
        for i in range(n)
    ]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((i, j))
    return Graph(f"random-{seed}", nodes, edges)


def random_hourglass(
    seed: int,
    cells: int = 2,
    cell_lo: int = 3,
    cell_hi: int = 5,
    size_lo: int = 1,
    size_hi: int = 64,
) -> Graph:
    """Single-source/single-sink DAG: random cells joined at cut nodes."""
    rng = random.Random(seed)
    nodes: list[Node] = []
    edges: list[tuple[int, int]] = []

    def add_node(nid: int) -> None:
        nodes.append(
            Node(
                id=nid,
                op="opaque",
                output_shape=(rng.randint(size_lo, size_hi),),
                dtype_bytes=1,
            )
        )

    nid = 0
    add_node(nid)
    entry = nid
    nid += 1
    for _ in range(cells):
        middle = []
        for _ in range(rng.randint(cell_lo, cell_hi)):
            add_node(nid)
            middle.append(nid)
            nid += 1
        add_node(nid)
        exit_ = nid
        nid += 1
        for m in middle:
            edges.append((entry, m))
            edges.append((m, exit_))
        # optional wiring inside the cell
        for i, a in enumerate(middle):
            for b in middle[i + 1 :]:
                if rng.random() < 0.25:
                    edges.append((a, b))
        entry = exit_
    return Graph(f"hourglass-{seed}", nodes, edges)


def worst_case_topology(n: int) -> Graph:
    """Single entry, single exit, n-2 independent middle nodes (DP worst case)."""
    if n < 3:
        raise ValueError("need at least 3 nodes")
    nodes = [Node(id=i, op="opaque", output_shape=(1,), dtype_bytes=1) for i in range(n)]
    edges = [(0, i) for i in range(1, n - 1)] + [(i, n - 1) for i in range(1, n - 1)]
    return Graph(f"worstcase-{n}", nodes, edges)
