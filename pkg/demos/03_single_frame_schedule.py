"""Outer problem: which UAV jams which radar.

On the 3-UAV / 2-radar toy all 27 assignments can be enumerated, so the
surrogate-assisted search can be checked against the exhaustive answer; on
the 12-UAV network the same machinery runs in seconds per frame.
"""

import itertools

import numpy as np

from farjam import OuterConfig, default_scenario, toy_scenario
from farjam.otaa import BudgetAccountant, make_ibaa_evaluator, solve_frame

toy = toy_scenario()
cfg = OuterConfig(population_size=6, t_max=150, budget=10**9)
evaluator = make_ibaa_evaluator(toy, cfg.inner, run_seed=3)
jsr_table = toy.jsr_table(toy.initial_state)

truth = {tasks: evaluator(tasks, 1, toy.initial_state, jsr_table, None).utility
         for tasks in itertools.product(range(3), repeat=3)}
best = max(truth, key=truth.get)
print(f"toy exhaustive optimum: {best} at {truth[best]:.5f}")

result, _ = solve_frame(1, toy, toy.initial_state, None, cfg,
                        np.random.default_rng(1), evaluator,
                        BudgetAccountant(cfg.budget))
print(f"search found:           {tuple(result.assignment.tasks)} at {result.utility:.5f}")

scenario = default_scenario()
cfg = OuterConfig(population_size=6, t_max=100, budget=10**6)
result, _ = solve_frame(1, scenario, scenario.initial_state, None, cfg,
                        np.random.default_rng(0),
                        make_ibaa_evaluator(scenario, cfg.inner, 0),
                        BudgetAccountant(cfg.budget))
print(f"\nreference network, frame 1: utility {result.utility:.4f} "
      f"({result.ibaa_runs} true evaluations)")
for m in range(1, 4):
    members = [n + 1 for n, t in enumerate(result.assignment.tasks) if t == m]
    print(f"  radar {m}: UAVs {members}")
print(f"  idle: {[n + 1 for n, t in enumerate(result.assignment.tasks) if t == 0]}")
