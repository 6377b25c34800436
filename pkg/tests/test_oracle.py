from fractions import Fraction as F

import pytest

from seqcontract import (
    CapacityError,
    Contract,
    agent_utility,
    enumerate_nonadaptive,
    gen_critpoints_instance,
    gen_random_contract,
    gen_random_instance,
    grid_search_general,
    oracle_best_linear,
    oracle_best_response,
    outcome_distribution,
    principal_utility,
    principal_utility_for,
    solve_general,
    solve_linear,
    strategy_count,
)


def random_case(seed: int, max_n: int = 3, max_m: int = 3):
    n = 1 + seed % max_n
    m = 1 + (seed // max_n) % max_m
    inst = gen_random_instance(n, m, seed)
    return inst, gen_random_contract(inst, seed + 31)


class TestEnumeration:
    def test_counts(self, i1):
        assert strategy_count(i1) == 6
        assert sum(1 for _ in enumerate_nonadaptive(i1)) == 6

    def test_counts_two_by_two(self):
        inst = gen_random_instance(2, 2, 0)
        assert strategy_count(inst) == 36
        strategies = list(enumerate_nonadaptive(inst))
        assert len(strategies) == 36
        assert len(set(strategies)) == 36

    def test_budget(self):
        inst = gen_random_instance(4, 4, 0)
        with pytest.raises(CapacityError):
            list(enumerate_nonadaptive(inst, budget=1000))


class TestBestResponseOracle:
    def test_indifference_example(self, i1):
        report = oracle_best_response(i1, Contract((F(0), F(1, 5))))
        assert report.best_agent_utility == F(0)
        assert report.principal_value == F(2, 5)

    def test_all_zero_contract(self, i1):
        report = oracle_best_response(i1, Contract((F(0), F(0))))
        assert report.best_agent_utility == F(0)
        assert report.principal_value == F(0)

    def test_unique_optimum(self, i1, i1_contract):
        report = oracle_best_response(i1, i1_contract)
        assert report.best_agent_utility == F(1, 10)
        assert report.principal_value == F(3, 10)
        for s in report.maximizers:
            _, taken = outcome_distribution(i1, s)
            assert taken == (F(1),)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_naive_enumeration(self, seed):
        inst, contract = random_case(seed)
        report = oracle_best_response(inst, contract)
        best = None
        favored = None
        count = 0
        for s in enumerate_nonadaptive(inst):
            ua = agent_utility(inst, contract, s)
            if best is None or ua > best:
                best = ua
                favored = principal_utility_for(inst, contract, s)
                count = 1
            elif ua == best:
                count += 1
                up = principal_utility_for(inst, contract, s)
                if up > favored:
                    favored = up
        assert report.best_agent_utility == best
        assert report.principal_value == favored
        assert report.maximizer_count == count

    @pytest.mark.parametrize("seed", range(12))
    def test_materialized_maximizers_are_optimal(self, seed):
        inst, contract = random_case(seed)
        report = oracle_best_response(inst, contract)
        sample = report.maximizers[:50]
        for s in sample:
            assert agent_utility(inst, contract, s) == report.best_agent_utility
        assert (
            agent_utility(inst, contract, report.principal_strategy)
            == report.best_agent_utility
        )
        assert (
            principal_utility_for(inst, contract, report.principal_strategy)
            == report.principal_value
        )

    @pytest.mark.parametrize("seed", range(20))
    def test_solver_agrees(self, seed):
        inst, contract = random_case(seed)
        report = oracle_best_response(inst, contract)
        utility, strategy = principal_utility(inst, contract)
        assert utility == report.principal_value
        assert agent_utility(inst, contract, strategy) == report.best_agent_utility


class TestLinearOracle:
    def test_i1(self, i1):
        assert oracle_best_linear(i1) == (F(1, 5), F(2, 5))

    def test_critpoints(self):
        inst = gen_critpoints_instance(3)
        assert oracle_best_linear(inst) == (F(1, 6), F(10, 9))

    def test_all_costs_zero(self):
        from seqcontract import Instance

        inst = Instance(
            (F(0), F(2)),
            (F(0),),
            ((F(1, 4), F(3, 4)),),
        )
        alpha, utility = oracle_best_linear(inst)
        assert alpha == F(0)
        assert utility == F(3, 2)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_solver(self, seed):
        inst, _ = random_case(seed)
        alpha, utility = oracle_best_linear(inst)
        s_alpha, s_utility, _ = solve_linear(inst)
        assert (alpha, utility) == (s_alpha, s_utility)


class TestGridSearch:
    def test_i1_grid_hits_optimum(self, i1):
        contract, utility = grid_search_general(i1, step=F(1, 10))
        assert utility == F(2, 5)
        assert contract.payments == (F(0), F(1, 5))

    def test_step_l_corners(self, i1):
        contract, utility = grid_search_general(i1, step=F(2))
        assert contract.payments in {
            (F(0), F(0)),
            (F(0), F(2)),
            (F(2), F(0)),
            (F(2), F(2)),
        }

    @pytest.mark.parametrize("seed", range(4))
    def test_solver_dominates_grid(self, seed):
        inst = gen_random_instance(2, 3, seed)
        solution = solve_general(inst)
        from seqcontract import payment_bound

        step = payment_bound(inst) / 12
        _, grid_utility = grid_search_general(inst, step=step)
        assert solution.utility >= grid_utility

    def test_point_budget(self, i1):
        with pytest.raises(CapacityError):
            grid_search_general(i1, step=F(1, 1000), point_budget=100)
