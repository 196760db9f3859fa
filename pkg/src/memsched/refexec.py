"""Tiny tensor executor used to check that rewriting preserves arithmetic.

Operates on float64 CHW arrays regardless of the footprint model's dtype: the
executor verifies algebra, not numerics at deployment precision. Convolutions
are stride-1 with 'same' (default) or 'valid' padding.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, topological_ids


class ExecError(ValueError):
    pass


def _conv2d(x: np.ndarray, w: np.ndarray, padding: str) -> np.ndarray:
    """x: [c, h, w]; w: [m, c, kh, kw] -> [m, h', w']."""
    m, c, kh, kw = w.shape
    if x.shape[0] != c:
        raise ExecError(f"conv channel mismatch: input {x.shape[0]}, weight {c}")
    if padding == "same":
        ph, pw = (kh - 1) // 2, (kw - 1) // 2
        x = np.pad(x, ((0, 0), (ph, kh - 1 - ph), (pw, kw - 1 - pw)))
    elif padding != "valid":
        raise ExecError(f"unsupported padding {padding!r}")
    h_out = x.shape[1] - kh + 1
    w_out = x.shape[2] - kw + 1
    out = np.zeros((m, h_out, w_out))
    for i in range(kh):
        for j in range(kw):
            patch = x[:, i : i + h_out, j : j + w_out]
            out += np.einsum("mc,chw->mhw", w[:, :, i, j], patch)
    return out


def _depthwise2d(x: np.ndarray, w: np.ndarray, padding: str) -> np.ndarray:
    """x: [c, h, w]; w: [c, kh, kw] -> [c, h', w']."""
    c, kh, kw = w.shape
    if x.shape[0] != c:
        raise ExecError(f"depthconv channel mismatch: {x.shape[0]} vs {c}")
    if padding == "same":
        ph, pw = (kh - 1) // 2, (kw - 1) // 2
        x = np.pad(x, ((0, 0), (ph, kh - 1 - ph), (pw, kw - 1 - pw)))
    elif padding != "valid":
        raise ExecError(f"unsupported padding {padding!r}")
    h_out = x.shape[1] - kh + 1
    w_out = x.shape[2] - kw + 1
    out = np.zeros((c, h_out, w_out))
    for i in range(kh):
        for j in range(kw):
            out += w[:, i : i + 1, j : j + 1] * x[:, i : i + h_out, j : j + w_out]
    return out


def _avg_pool(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    c, h, w = x.shape
    if h % kh or w % kw:
        raise ExecError(f"pool kernel ({kh},{kw}) does not tile input {x.shape}")
    return x.reshape(c, h // kh, kh, w // kw, kw).mean(axis=(2, 4))


def execute(
    g: Graph,
    inputs: dict[int, np.ndarray],
    weights: dict[int, np.ndarray] | None = None,
) -> dict[int, np.ndarray]:
    """Evaluate every node; `inputs` feeds all zero-indegree nodes."""
    weights = weights or {}
    values: dict[int, np.ndarray] = {}
    for nid in topological_ids(g):
        node = g.nodes[nid]
        op = node.op
        preds = g.preds[nid]
        if not preds:
            if nid not in inputs:
                raise ExecError(f"missing input tensor for source node {nid}")
            values[nid] = np.asarray(inputs[nid], dtype=float)
            continue
        xs = [values[p] for p in preds]
        padding = str(node.attrs.get("padding", "same"))
        if op in ("conv", "partial_conv"):
            if nid not in weights:
                raise ExecError(f"missing weight for node {nid}")
            values[nid] = _conv2d(xs[0], np.asarray(weights[nid], float), padding)
        elif op in ("depthwise_conv", "partial_depthwise_conv"):
            if nid not in weights:
                raise ExecError(f"missing weight for node {nid}")
            values[nid] = _depthwise2d(xs[0], np.asarray(weights[nid], float), padding)
        elif op == "concat":
            axis = int(node.attrs.get("channel_axis", 0))
            if node.alloc_group is not None:
                # in-place collector: order slices by their channel range
                order = sorted(preds, key=lambda p: g.nodes[p].attrs["in_lo"])
                xs = [values[p] for p in order]
            values[nid] = np.concatenate(xs, axis=axis)
        elif op == "add":
            out = xs[0]
            for x in xs[1:]:
                if x.shape != out.shape:
                    raise ExecError(f"add shape mismatch at node {nid}")
                out = out + x
            values[nid] = out
        elif op == "relu":
            values[nid] = np.maximum(xs[0], 0.0)
        elif op == "pool":
            kh = int(node.attrs.get("kh", 2))
            kw = int(node.attrs.get("kw", 2))
            values[nid] = _avg_pool(xs[0], kh, kw)
        elif op in ("identity", "output"):
            values[nid] = xs[0]
        else:
            raise ExecError(f"unsupported op {op!r} in reference executor")
        expect = tuple(node.output_shape)
        if values[nid].shape != expect:
            raise ExecError(
                f"node {nid} ({op}) produced shape {values[nid].shape}, "
                f"declared {expect}"
            )
    return values


def _output_map(g: Graph, g2: Graph) -> list[tuple[int, int]]:
    """Pair up g's outputs with their counterparts in the rewritten graph."""
    outs = [i for i in sorted(g.nodes) if g.nodes[i].op == "output"] or list(g.sinks)
    replaced = {
        n.attrs["replaces"]: nid
        for nid, n in g2.nodes.items()
        if "replaces" in n.attrs
    }
    pairs = []
    for o in outs:
        if o in g2.nodes:
            pairs.append((o, o))
        elif o in replaced:
            pairs.append((o, replaced[o]))
        else:
            raise ExecError(f"output node {o} has no counterpart in rewritten graph")
    return pairs


def _random_weights(g: Graph, rng: np.random.Generator) -> dict[int, np.ndarray]:
    weights = {}
    for nid in sorted(g.nodes):
        node = g.nodes[nid]
        if node.op not in ("conv", "depthwise_conv"):
            continue
        kh = int(node.attrs.get("kh", 1))
        kw = int(node.attrs.get("kw", 1))
        axis = int(node.attrs.get("channel_axis", 0))
        m = node.output_shape[axis]
        (pred,) = g.preds[nid]
        c_in = g.nodes[pred].output_shape[int(g.nodes[pred].attrs.get("channel_axis", 0))]
        if node.op == "conv":
            weights[nid] = rng.standard_normal((m, c_in, kh, kw))
        else:
            weights[nid] = rng.standard_normal((c_in, kh, kw))
    return weights


def derive_weights(
    g2: Graph, base_weights: dict[int, np.ndarray]
) -> dict[int, np.ndarray]:
    """Weights for a rewritten graph: untouched ops keep theirs, partial ops
    take the channel slice of the original weight recorded at rewrite time."""
    weights = {}
    for nid in sorted(g2.nodes):
        node = g2.nodes[nid]
        if node.op in ("conv", "depthwise_conv"):
            weights[nid] = base_weights[nid]
        elif node.op == "partial_conv":
            w = base_weights[int(node.attrs["src_op"])]
            weights[nid] = w[:, int(node.attrs["in_lo"]) : int(node.attrs["in_hi"])]
        elif node.op == "partial_depthwise_conv":
            w = base_weights[int(node.attrs["src_op"])]
            weights[nid] = w[int(node.attrs["in_lo"]) : int(node.attrs["in_hi"])]
    return weights


def equivalence_check(
    g: Graph, g2: Graph, trials: int = 10, seed: int = 0
) -> float:
    """Max absolute output difference over seeded random-input executions."""
    pairs = _output_map(g, g2)
    rng = np.random.default_rng(seed)
    max_diff = 0.0
    for _ in range(trials):
        sources = {nid: None for nid in g.sources}
        inputs = {
            nid: rng.standard_normal(tuple(g.nodes[nid].output_shape))
            for nid in sources
        }
        base_weights = _random_weights(g, rng)
        v1 = execute(g, inputs, base_weights)
        v2 = execute(g2, inputs, derive_weights(g2, base_weights))
        for a, b in pairs:
            max_diff = max(max_diff, float(np.max(np.abs(v1[a] - v2[b]))))
    return max_diff
