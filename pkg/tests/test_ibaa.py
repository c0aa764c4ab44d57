import json
from dataclasses import replace

import numpy as np
import pytest

from farjam.ibaa import (InnerConfig, _Layout, crossover, frofi_mutation_strategy,
                         frofi_replacement, mutate, optimize_bandwidth, select)
from farjam.model import TaskAssignment, validate_bandwidth
from farjam.otaa import BudgetAccountant
from farjam.scenario import Scenario, default_scenario, toy_scenario
from farjam.utility import total_utility

BM = 500e6


@pytest.fixture(scope="module")
def world():
    return default_scenario()


@pytest.fixture(scope="module")
def toy():
    return toy_scenario()


def symmetric_pair_scenario():
    """Two mainlobe UAVs mirrored about the radar boresight: identical JSR by
    symmetry, and strong enough that the split-evenly optimum is interior."""
    cfg = toy_scenario().to_dict()
    cfg["radars"] = [dict(cfg["radars"][0], position_m=[0.0, 0.0], threat_weight=1.0)]
    cfg["uavs"] = [dict(cfg["uavs"][0], position_m=[2000.0, 9000.0]),
                   dict(cfg["uavs"][0], position_m=[-2000.0, 9000.0])]
    cfg["target_initial_state"] = [0.0, 0.0, 80000.0, -240.0]
    return Scenario.from_dict(cfg)


class TestConfig:
    def test_population_floor(self):
        with pytest.raises(ValueError):
            InnerConfig(population_size=3)

    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            InnerConfig(scaling_factor=0.0)
        with pytest.raises(ValueError):
            InnerConfig(crossover_rate=1.5)


class TestMutate:
    def test_zero_scaling_returns_base(self):
        pop = np.arange(20, dtype=float).reshape(5, 4)
        out = mutate(pop, 2, 0, "rand", 0.0, np.random.default_rng(0))
        assert np.array_equal(out, pop[2])

    def test_identical_population_is_fixed_point(self):
        pop = np.tile([1.0, 2.0], (5, 1))
        for variant in ("rand", "best"):
            out = mutate(pop, 1, 3, variant, 0.6, np.random.default_rng(0))
            assert np.allclose(out, [1.0, 2.0])

    def test_hand_arithmetic(self):
        # rows 1..3 identical, so any partner draw gives base + F(b - base)
        a = np.array([10.0, -4.0])
        b = np.array([2.0, 6.0])
        pop = np.vstack([a, b, b, b])
        out = mutate(pop, 0, 0, "rand", 0.5, np.random.default_rng(1))
        assert np.allclose(out, a + 0.5 * (b - a))

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            mutate(np.zeros((4, 2)), 0, 0, "other", 0.5, np.random.default_rng(0))


class TestCrossover:
    def test_full_rate_copies_mutant(self):
        t, m = np.zeros(6), np.ones(6)
        assert np.array_equal(crossover(t, m, 1.0, np.random.default_rng(0)), m)

    def test_zero_rate_single_coordinate(self):
        t, m = np.zeros(30), np.ones(30)
        out = crossover(t, m, 0.0, np.random.default_rng(0))
        assert out.sum() == 1.0

    def test_take_rate_matches_crossover_rate(self):
        n = 100_000
        out = crossover(np.zeros(n), np.ones(n), 0.7, np.random.default_rng(0))
        assert out.mean() == pytest.approx(0.7, abs=0.01)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            crossover(np.zeros(3), np.zeros(4), 0.5, np.random.default_rng(0))


class TestSelect:
    def test_lower_violation_wins(self):
        assert select((0.1, 5.0), (0.0, 1.0)) == (True, False)
        assert select((0.9, 1.0), (0.1, 5.0)) == (False, False)

    def test_equal_violation_ties_to_trial(self):
        assert select((0.5, 2.0), (0.5, 2.0)) == (True, False)
        assert select((0.5, 0.0), (0.6, 0.0)) == (True, False)
        assert select((0.7, 0.0), (0.6, 0.0)) == (False, False)

    def test_losing_trial_with_better_utility_archived(self):
        assert select((0.1, 1.0), (0.5, 3.0)) == (False, True)
        assert select((0.5, 1.0), (0.2, 3.0)) == (False, False)


class TestFrofiReplacement:
    def test_empty_archive_noop(self):
        pop = np.arange(8, dtype=float).reshape(4, 2)
        before = pop.copy()
        frofi_replacement(pop, np.arange(4.0), np.zeros(4), [])
        assert np.array_equal(pop, before)

    def test_weak_archive_member_never_enters(self):
        pop = np.zeros((4, 2))
        utilities = np.array([4.0, 3.0, 2.0, 1.0])
        violations = np.array([0.0, 1.0, 0.0, 2.0])
        frofi_replacement(pop, utilities, violations,
                          [(np.ones(2), 0.5, 9.0)])
        assert not np.any(pop == 1.0)

    def test_single_member_replaces_most_violating(self):
        # six individuals; one archive member with top utility lands on the
        # most-violating individual of the single part
        pop = np.zeros((6, 2))
        utilities = np.array([6.0, 5.0, 4.0, 3.0, 2.0, 1.0])
        violations = np.array([0.0, 7.0, 1.0, 0.0, 3.0, 0.0])
        frofi_replacement(pop, utilities, violations, [(np.full(2, 8.0), 9.0, 4.0)])
        assert np.all(pop[1] == 8.0)
        assert utilities[1] == 9.0 and violations[1] == 4.0

    def test_two_members_map_to_sorted_parts(self):
        pop = np.zeros((4, 2))
        utilities = np.array([1.0, 4.0, 3.0, 2.0])
        violations = np.array([5.0, 0.0, 6.0, 0.0])
        archive = [(np.full(2, 7.0), 10.0, 1.0), (np.full(2, 9.0), 2.5, 1.0)]
        frofi_replacement(pop, utilities, violations, archive)
        # part 1 holds utilities {4, 3}: the max-violation member (u=3) loses
        # to the first archive entry; in part 2 {2, 1} the max-violation member
        # (u=1) loses to the second
        assert utilities.tolist() == [2.5, 4.0, 10.0, 2.0]
        assert violations.tolist() == [1.0, 0.0, 1.0, 0.0]
        assert np.all(pop[2] == 7.0) and np.all(pop[0] == 9.0)


class TestFrofiMutation:
    def layout(self, world):
        a = TaskAssignment.from_tasks([1, 1] + [0] * 10, 3)
        return _Layout(a, world, world.jsr_table(world.initial_state))

    def test_noop_when_any_feasible(self, world):
        lay = self.layout(world)
        pop = np.full((4, 2), 1e8)
        utilities, violations = np.zeros(4), np.array([0.0, 1.0, 2.0, 3.0])
        before = pop.copy()
        spent = frofi_mutation_strategy(pop, utilities, violations, lay.col_ub,
                                        1.0, np.random.default_rng(0), lay)
        assert spent == 0 and np.array_equal(pop, before)

    def test_noop_at_zero_probability(self, world):
        lay = self.layout(world)
        pop = np.full((4, 2), 1e8)
        utilities, violations = np.zeros(4), np.ones(4)
        spent = frofi_mutation_strategy(pop, utilities, violations, lay.col_ub,
                                        0.0, np.random.default_rng(0), lay)
        assert spent == 0

    def test_forced_trigger_replaces_worst(self, world):
        lay = self.layout(world)
        pop = np.full((4, 2), 1e8)
        utilities = np.zeros(4)
        violations = np.array([1.0, 9.0, 2.0, 3.0])
        spent = frofi_mutation_strategy(pop, utilities, violations, lay.col_ub,
                                        1.0, np.random.default_rng(0), lay)
        assert spent == 1
        assert not np.array_equal(pop[1], np.full(2, 1e8))
        assert np.array_equal(pop[0], np.full(2, 1e8))


class TestOptimizeBandwidth:
    def test_all_idle_immediate(self, world):
        a = TaskAssignment.from_tasks([0] * 12, 3)
        res = optimize_bandwidth(a, world, world.initial_state, InnerConfig(),
                                 np.random.default_rng(0))
        assert res.utility == 0.0 and res.evaluations == 0
        assert res.feasible and not res.truncated
        assert np.array_equal(res.allocation.grid, np.zeros((12, 4)))

    def test_single_uav_pinned_to_working_bandwidth(self, world):
        a = TaskAssignment.from_tasks([0] * 9 + [1, 0, 0], 3)
        res = optimize_bandwidth(a, world, world.initial_state, InnerConfig(),
                                 np.random.default_rng(0))
        assert res.feasible
        assert res.allocation.grid[9, 1] == pytest.approx(BM, rel=1e-6)

    def test_symmetric_pair_matches_grid_oracle(self):
        world = symmetric_pair_scenario()
        a = TaskAssignment.from_tasks([1, 1], 1)
        jt = world.jsr_table(world.initial_state)
        assert jt[0, 0] == pytest.approx(jt[1, 0], rel=1e-12)
        res = optimize_bandwidth(a, world, world.initial_state, InnerConfig(),
                                 np.random.default_rng(3), jsr_table=jt)
        # oracle: 10^4-point grid over the cover line b2 = BM - b1
        req = world.environment.jsr_requirement
        b1 = np.linspace(0.0, BM, 10_001)
        with np.errstate(divide="ignore"):
            f1 = np.exp(-req * b1 / jt[0, 0])
            f2 = np.exp(-req * (BM - b1) / jt[1, 0])
        grid_best = np.max(f1 * b1 / BM + f2 * (BM - b1) / BM)
        assert res.feasible
        assert res.utility == pytest.approx(grid_best, abs=1e-4)
        b = res.allocation.grid[:, 1]
        assert abs(b[0] - b[1]) < 0.05 * BM      # symmetric optimum

    def test_matches_total_utility(self, toy):
        a = TaskAssignment.from_tasks([1, 2, 2], 2)
        res = optimize_bandwidth(a, toy, toy.initial_state, InnerConfig(),
                                 np.random.default_rng(1))
        out = total_utility(a, res.allocation, toy, toy.initial_state)
        assert res.utility == pytest.approx(out.total, rel=1e-9)

    def test_idle_entries_exact_zero(self, toy):
        a = TaskAssignment.from_tasks([1, 0, 2], 2)
        res = optimize_bandwidth(a, toy, toy.initial_state, InnerConfig(),
                                 np.random.default_rng(2))
        grid = res.allocation.grid
        assert np.all(grid[1] == 0.0)
        assert grid[0, 2] == 0.0 and grid[2, 1] == 0.0
        assert np.all(grid[:, 0] == 0.0)

    def test_best_trace_monotone(self, toy):
        a = TaskAssignment.from_tasks([1, 2, 2], 2)
        res = optimize_bandwidth(a, toy, toy.initial_state, InnerConfig(trace=True),
                                 np.random.default_rng(4))
        trace = res.trace
        for (_, u0, g0), (_, u1, g1) in zip(trace, trace[1:]):
            assert (g1 < g0) or (g1 == g0 and u1 >= u0)

    def test_deterministic_under_seed(self, toy):
        a = TaskAssignment.from_tasks([1, 2, 2], 2)
        r1 = optimize_bandwidth(a, toy, toy.initial_state, InnerConfig(),
                                np.random.default_rng(11))
        r2 = optimize_bandwidth(a, toy, toy.initial_state, InnerConfig(),
                                np.random.default_rng(11))
        assert r1.utility == r2.utility
        assert np.array_equal(r1.allocation.grid, r2.allocation.grid)

    def test_nominal_budget_consumption(self, toy):
        a = TaskAssignment.from_tasks([1, 2, 2], 2)
        cfg = InnerConfig(generations_per_dim=None)
        res = optimize_bandwidth(a, toy, toy.initial_state, cfg,
                                 np.random.default_rng(5))
        assert res.evaluations >= cfg.population_size * (cfg.max_generations + 1)
        # rescue mutations may add a handful on top of the nominal cost
        assert res.evaluations <= cfg.population_size * (cfg.max_generations + 1) + cfg.max_generations

    def test_budget_truncation(self, toy):
        a = TaskAssignment.from_tasks([1, 2, 2], 2)
        budget = BudgetAccountant(15 * 40)
        res = optimize_bandwidth(a, toy, toy.initial_state, InnerConfig(),
                                 np.random.default_rng(6), budget=budget)
        assert res.truncated
        assert budget.consumed == 15 * 40
        assert np.isfinite(res.utility)

    def test_feasible_output_validates(self, world):
        rng = np.random.default_rng(13)
        for _ in range(5):
            tasks = rng.integers(0, 4, 12)
            a = TaskAssignment.from_tasks(tasks, 3)
            res = optimize_bandwidth(a, world, world.initial_state, InnerConfig(),
                                     np.random.default_rng(int(rng.integers(1e6))))
            if res.feasible:
                assert validate_bandwidth(a, res.allocation, world.radars).feasible
