import pytest

from memsched.graph import Graph, Node
from memsched.rewrite import apply_rewrite, match_patterns, rewrite_all
from memsched.scheduler import schedule_dp


def _branchy(op_node, extra_edges=()):
    nodes = [
        Node(0, "identity", (16, 8, 8), 4),
        Node(1, "identity", (16, 8, 8), 4),
        Node(2, "concat", (32, 8, 8), 4, {"channel_axis": 0}),
        op_node,
    ]
    return Graph("t", nodes, [(0, 2), (1, 2), (2, 3), *extra_edges])


class TestMatch:
    def test_conv_pair_matches(self):
        g = _branchy(Node(3, "conv", (8, 8, 8), 4, {"kh": 1, "kw": 1}))
        (m,) = match_patterns(g)
        assert m.kind == "channel_wise_conv"
        assert m.branch_inputs == (0, 1)
        assert m.branch_channels == (16, 16)

    def test_depthconv_pair_matches(self):
        g = _branchy(
            Node(3, "depthwise_conv", (32, 8, 8), 4, {"kh": 3, "kw": 3})
        )
        (m,) = match_patterns(g)
        assert m.kind == "kernel_wise_depthconv"

    def test_relu_consumer_no_match(self):
        g = _branchy(Node(3, "relu", (32, 8, 8), 4))
        assert match_patterns(g) == []

    def test_shared_concat_no_match(self):
        # concat also feeds a pool: substitution would change that consumer
        g = _branchy(
            Node(3, "conv", (8, 8, 8), 4, {"kh": 1, "kw": 1}),
        )
        nodes = list(g.nodes.values()) + [
            Node(4, "pool", (32, 4, 4), 4, {"kh": 2, "kw": 2})
        ]
        g2 = Graph("t", nodes, list(g.edges) + [(2, 4)])
        assert match_patterns(g2) == []

    def test_single_input_concat_no_match(self):
        nodes = [
            Node(0, "identity", (32, 8, 8), 4),
            Node(1, "concat", (32, 8, 8), 4, {"channel_axis": 0}),
            Node(2, "conv", (8, 8, 8), 4, {"kh": 1, "kw": 1}),
        ]
        g = Graph("t", nodes, [(0, 1), (1, 2)])
        assert match_patterns(g) == []

    def test_depthconv_channel_change_no_match(self):
        # a depthwise op must preserve the channel count
        g = _branchy(
            Node(3, "depthwise_conv", (16, 8, 8), 4, {"kh": 3, "kw": 3})
        )
        assert match_patterns(g) == []


class TestApply:
    def test_conv_rewrite_structure(self):
        g = _branchy(Node(3, "conv", (8, 8, 8), 4, {"kh": 1, "kw": 1}))
        (m,) = match_patterns(g)
        g2 = apply_rewrite(g, m)
        assert len(g2.nodes) == len(g.nodes) + 1  # 2 partials + collector - 2
        partials = [n for n in g2.nodes.values() if n.op == "partial_conv"]
        assert len(partials) == 2
        assert {p.output_shape for p in partials} == {(8, 8, 8)}
        (collector,) = [n for n in g2.nodes.values() if n.op == "add"]
        assert collector.attrs["replaces"] == 3
        gid = collector.alloc_group
        assert all(p.alloc_group == gid for p in partials)
        assert g2.groups[gid].total_bytes == 8 * 8 * 8 * 4

    def test_depthconv_rewrite_slices(self):
        g = _branchy(
            Node(3, "depthwise_conv", (32, 8, 8), 4, {"kh": 3, "kw": 3})
        )
        (m,) = match_patterns(g)
        g2 = apply_rewrite(g, m)
        partials = sorted(
            (n for n in g2.nodes.values() if n.op == "partial_depthwise_conv"),
            key=lambda n: n.attrs["in_lo"],
        )
        assert [p.output_shape for p in partials] == [(16, 8, 8), (16, 8, 8)]
        assert [(p.attrs["in_lo"], p.attrs["in_hi"]) for p in partials] == [
            (0, 16),
            (16, 32),
        ]
        (collector,) = [
            n for n in g2.nodes.values() if n.op == "concat" and n.alloc_group
        ]
        assert collector.attrs["replaces"] == 3

    def test_collector_adopts_consumers(self):
        g = _branchy(Node(3, "conv", (8, 8, 8), 4, {"kh": 1, "kw": 1}))
        nodes = list(g.nodes.values()) + [Node(4, "relu", (8, 8, 8), 4)]
        g1 = Graph("t", nodes, list(g.edges) + [(3, 4)])
        (m,) = match_patterns(g1)
        g2 = apply_rewrite(g1, m)
        (collector,) = [n for n in g2.nodes.values() if n.op == "add"]
        assert g2.preds[4] == [collector.id]


class TestRewriteAll:
    @pytest.mark.parametrize(
        "name,before,after",
        [("rewrite_conv_pair", 10240, 6144), ("rewrite_depthconv_pair", 16384, 12288)],
    )
    def test_pair_fixture_region_cost(self, name, before, after):
        from conftest import fixture

        g = fixture(name)
        assert schedule_dp(g).peak_bytes == before
        g2, applied = rewrite_all(g)
        assert len(applied) == 1
        assert schedule_dp(g2).peak_bytes == after

    def test_cellnet_node_counts(self, cellnet):
        g2, applied = rewrite_all(cellnet)
        assert len(cellnet.nodes) == 62
        assert len(g2.nodes) == 92
        assert len(applied) == 8

    def test_fixpoint_no_remaining_matches(self, cellnet):
        g2, _ = rewrite_all(cellnet)
        assert match_patterns(g2) == []

    def test_noop_on_plain_graph(self, twochain):
        g2, applied = rewrite_all(twochain)
        assert applied == [] and g2 is twochain
