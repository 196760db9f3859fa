import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memsched.generate import random_dag, worst_case_topology
from memsched.graph import GraphError, recompute_live
from memsched.oracle import brute_force_optimal
from memsched.scheduler import (
    NoSolution,
    SearchStats,
    Solution,
    Timeout,
    evaluate_schedule,
    kahn_schedule,
    schedule_dp,
)


class TestEvaluate:
    def test_chain_peak(self, chain):
        peak, trace = evaluate_schedule([0, 1, 2], chain)
        assert peak == 8
        assert [r.live_after_free for r in trace] == [3, 5, 2]

    def test_twochain_orders(self, twochain):
        good, _ = evaluate_schedule([0, 1, 2, 3, 4, 5], twochain)
        bad, _ = evaluate_schedule([0, 1, 3, 2, 4, 5], twochain)
        assert good == 61
        assert bad == 100

    def test_rejects_non_permutation(self, chain):
        with pytest.raises(GraphError, match="permutation"):
            evaluate_schedule([0, 1], chain)

    def test_rejects_non_topological(self, chain):
        with pytest.raises(GraphError, match="topological"):
            evaluate_schedule([1, 0, 2], chain)

    def test_mu0_extra_shifts_everything(self, chain):
        p0, t0 = evaluate_schedule([0, 1, 2], chain)
        p1, t1 = evaluate_schedule([0, 1, 2], chain, mu0_extra=100)
        assert p1 == p0 + 100
        assert [r.live_after_free for r in t1] == [
            r.live_after_free + 100 for r in t0
        ]


class TestKahn:
    def test_fifo_with_id_tiebreak(self, twochain):
        assert kahn_schedule(twochain) == [0, 1, 3, 2, 4, 5]

    def test_is_topological(self, stacked_diamonds):
        evaluate_schedule(kahn_schedule(stacked_diamonds), stacked_diamonds)


class TestDP:
    def test_chain(self, chain):
        s = schedule_dp(chain)
        assert isinstance(s, Solution)
        assert (s.order, s.peak_bytes) == ([0, 1, 2], 8)

    def test_twochain_beats_kahn(self, twochain):
        s = schedule_dp(twochain)
        assert s.peak_bytes == 61
        assert s.order == [0, 1, 2, 3, 4, 5]
        kahn_peak, _ = evaluate_schedule(kahn_schedule(twochain), twochain)
        assert kahn_peak == 100

    def test_diamond(self, diamond):
        s = schedule_dp(diamond)
        assert s.peak_bytes == 35

    def test_trace_matches_order(self, twochain):
        s = schedule_dp(twochain)
        assert [r.node for r in s.trace] == s.order
        assert s.trace[-1].peak_so_far == s.peak_bytes

    def test_budget_at_optimum_succeeds(self, twochain):
        s = schedule_dp(twochain, budget=61)
        assert isinstance(s, Solution) and s.peak_bytes == 61

    def test_budget_below_optimum_is_no_solution(self, twochain):
        out = schedule_dp(twochain, budget=60)
        assert isinstance(out, NoSolution)
        assert out.budget == 60

    def test_budget_must_be_positive(self, chain):
        with pytest.raises(ValueError):
            schedule_dp(chain, budget=0)

    def test_zero_time_limit_times_out(self):
        g = worst_case_topology(12)
        out = schedule_dp(g, step_time_limit=0.0)
        assert isinstance(out, Timeout)

    def test_deterministic_reruns(self, twochain):
        a = schedule_dp(twochain)
        b = schedule_dp(twochain)
        assert a.order == b.order and a.peak_bytes == b.peak_bytes

    def test_lexicographic_tiebreak(self):
        # all orders of the worst-case middle tie on peak: ids win
        g = worst_case_topology(6)
        s = schedule_dp(g)
        assert s.order == sorted(g.nodes)


class TestComplexityCounter:
    @pytest.mark.parametrize("n", [4, 5, 6, 7])
    def test_worst_case_candidate_count(self, n):
        stats = SearchStats()
        schedule_dp(worst_case_topology(n), stats=stats)
        assert stats.candidates_explored == 2 + (n - 2) * 2 ** (n - 3)

    def test_signature_count_bounded(self):
        g = worst_case_topology(7)
        stats = SearchStats()
        schedule_dp(g, stats=stats)
        assert stats.distinct_signatures <= 2 ** len(g.nodes)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_dp_matches_brute_force(seed):
    g = random_dag(seed, n_lo=4, n_hi=9)
    s = schedule_dp(g)
    _, best = brute_force_optimal(g)
    assert s.peak_bytes == best


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_dp_never_worse_than_kahn(seed):
    g = random_dag(seed)
    s = schedule_dp(g)
    kahn_peak, _ = evaluate_schedule(kahn_schedule(g), g)
    assert s.peak_bytes <= kahn_peak


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_trace_agrees_with_scratch_liveness(seed):
    g = random_dag(seed, n_lo=4, n_hi=9)
    s = schedule_dp(g)
    for i, row in enumerate(s.trace):
        assert row.live_after_free == recompute_live(g, s.order[: i + 1])
