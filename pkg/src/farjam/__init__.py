"""Dynamic jamming-swarm scheduling against a frequency-agile radar network.

A simulator plus a two-stage optimiser: an outer surrogate-assisted genetic
search over task assignments and an inner constrained differential evolution
over bandwidth allocations, re-solved frame by frame as the covered target
moves.
"""

from .ibaa import InnerConfig, InnerResult, optimize_bandwidth
from .kriging import EvaluatedPoint, EvaluationDataset, KrigingModel, lhs_initial_population
from .model import (BandwidthAllocation, Coalition, FeasibilityReport, TaskAssignment,
                    coalitions_of, validate_bandwidth)
from .otaa import (BudgetAccountant, FrameResult, MemoryPopulation, OuterConfig,
                   run_scenario, solve_frame)
from .scenario import (EnvironmentConstants, MotionModel, RadarParams, Scenario,
                       TargetState, UavParams, default_scenario, distance_target_radar,
                       distance_uav_radar, jsr, propagate_target, radar_gain_toward_uav,
                       toy_scenario, uav_radar_angle)
from .utility import (UtilityBreakdown, coalition_cost, coalition_reward,
                      constraint_violation, effect, jsr_bar, scored_total_utility,
                      suppression_probability, total_utility)

__version__ = "0.1.0"

__all__ = [
    "BandwidthAllocation", "BudgetAccountant", "Coalition", "EnvironmentConstants",
    "EvaluatedPoint", "EvaluationDataset", "FeasibilityReport", "FrameResult",
    "InnerConfig", "InnerResult", "KrigingModel", "MemoryPopulation", "MotionModel",
    "OuterConfig", "RadarParams", "Scenario", "TargetState", "TaskAssignment",
    "UavParams", "UtilityBreakdown", "coalition_cost", "coalition_reward",
    "coalitions_of", "constraint_violation", "default_scenario",
    "distance_target_radar", "distance_uav_radar", "effect", "jsr", "jsr_bar",
    "lhs_initial_population", "optimize_bandwidth", "propagate_target",
    "radar_gain_toward_uav", "run_scenario", "scored_total_utility", "solve_frame",
    "suppression_probability", "total_utility", "toy_scenario", "uav_radar_angle",
    "validate_bandwidth",
]
