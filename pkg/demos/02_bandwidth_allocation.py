"""Inner problem: split each radar's working band across its jammers.

A coalition must cover the radar's full hop band (the sum equality), but
spreading one UAV's power thin hurts its per-Hz effect, so the optimum gives
strong jammers wide slices and weak ones narrow slices. The constrained DE
finds this; the even split is the natural baseline.
"""

import numpy as np

from farjam import InnerConfig, TaskAssignment, default_scenario, optimize_bandwidth, total_utility
from farjam.model import BandwidthAllocation, validate_bandwidth

scenario = default_scenario()
target = scenario.initial_state

# UAVs 10 and 5 both jam radar 1: strong mainlobe + weak sidelobe member
tasks = [0] * 12
tasks[9] = 1
tasks[4] = 1
assignment = TaskAssignment.from_tasks(tasks, scenario.n_radars)

result = optimize_bandwidth(assignment, scenario, target,
                            InnerConfig(trace=True), np.random.default_rng(7))
print("optimised split (MHz):",
      {f"UAV {n + 1}": round(result.allocation.grid[n, 1] / 1e6, 1)
       for n in (4, 9)})
print(f"utility {result.utility:.4f}, feasible: "
      f"{validate_bandwidth(assignment, result.allocation, scenario.radars).feasible}")

even = BandwidthAllocation.zeros(12, 3)
even.grid[9, 1] = even.grid[4, 1] = scenario.radars[0].working_bandwidth / 2
print(f"even split utility {total_utility(assignment, even, scenario, target).total:.4f}")

print("\nconvergence (generation, best utility, best violation):")
for row in result.trace[:: len(result.trace) // 8]:
    print(f"  gen {row[0]:3d}: u={row[1]:.4f} G={row[2]:.3e}")
