import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memsched.generate import random_dag, worst_case_topology
from memsched.oracle import (
    MAX_ORACLE_NODES,
    brute_force_optimal,
    count_linear_extensions,
    enumerate_schedules,
)
from memsched.scheduler import evaluate_schedule


class TestEnumeration:
    def test_chain_has_one_order(self, chain):
        assert list(enumerate_schedules(chain)) == [[0, 1, 2]]

    def test_diamond_has_two(self, diamond):
        assert list(enumerate_schedules(diamond)) == [[0, 1, 2, 3], [0, 2, 1, 3]]

    def test_twochain_has_six(self, twochain):
        orders = list(enumerate_schedules(twochain))
        assert len(orders) == 6
        assert len({tuple(o) for o in orders}) == 6

    def test_worst_case_middle_permutes_freely(self):
        g = worst_case_topology(6)  # 4 independent middle nodes: 4! orders
        assert len(list(enumerate_schedules(g))) == 24

    def test_limit(self, twochain):
        assert len(list(enumerate_schedules(twochain, limit=2))) == 2

    def test_all_orders_topological(self, stacked_diamonds):
        for order in enumerate_schedules(stacked_diamonds):
            evaluate_schedule(order, stacked_diamonds)  # raises if invalid


class TestCounting:
    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_count_matches_enumeration(self, seed):
        g = random_dag(seed, n_lo=3, n_hi=7)
        assert count_linear_extensions(g) == sum(1 for _ in enumerate_schedules(g))


class TestBruteForce:
    def test_twochain_optimum(self, twochain):
        order, peak = brute_force_optimal(twochain)
        assert peak == 61
        assert order == [0, 1, 2, 3, 4, 5]

    def test_matches_exhaustive_evaluation(self, stacked_diamonds):
        _, peak = brute_force_optimal(stacked_diamonds)
        best = min(
            evaluate_schedule(o, stacked_diamonds)[0]
            for o in enumerate_schedules(stacked_diamonds)
        )
        assert peak == best == 14

    def test_size_guard(self):
        g = random_dag(0, n_lo=MAX_ORACLE_NODES + 1, n_hi=MAX_ORACLE_NODES + 1)
        with pytest.raises(ValueError, match="too large"):
            brute_force_optimal(g)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_independent_of_evaluator_bookkeeping(self, seed):
        """The fused DFS agrees with evaluate_schedule over every ordering."""
        g = random_dag(seed, n_lo=3, n_hi=7)
        order, peak = brute_force_optimal(g)
        check, _ = evaluate_schedule(order, g)
        assert check == peak
        assert all(
            evaluate_schedule(o, g)[0] >= peak for o in enumerate_schedules(g)
        )
