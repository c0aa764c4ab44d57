"""QoS utility stack: suppression probability, per-Hz JSR, effect, reward, cost.

The per-coalition utility is reward minus cost_factor * cost. The reward of a
coalition sums, over its members, effect(per-Hz JSR) * suppression
probability; the effect function is a saturating exponential so that both
vanishing and enormous per-Hz JSR have vanishing marginal value. The
constraint-violation measure is kept in Hz and is only ever compared
lexicographically against utilities, never mixed arithmetically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import BandwidthAllocation, TaskAssignment, coalitions_of
from .scenario import EnvironmentConstants, RadarParams, Scenario, TargetState


def suppression_probability(band: float, working_bandwidth: float) -> float:
    """Chance a random carrier hop lands inside the jammer's allocated band."""
    if working_bandwidth <= 0:
        raise ValueError("working bandwidth must be positive")
    if band < 0 or band > working_bandwidth:
        raise ValueError("allocated band must lie in [0, working bandwidth]")
    return band / working_bandwidth


def jsr_bar(jsr_value: float, band: float) -> float:
    """Bandwidth-normalised JSR: jamming energy density over the allocated band."""
    if band <= 0:
        raise ValueError("per-Hz JSR undefined for a zero allocated band")
    return jsr_value / band


def effect(jsr_bar_value: float, env: EnvironmentConstants) -> float:
    """Saturating jamming-quality score exp[-(requirement / jsr_bar)^L] in (0, 1)."""
    if jsr_bar_value <= 0:
        raise ValueError("effect requires a positive per-Hz JSR")
    return math.exp(-((env.jsr_requirement / jsr_bar_value) ** env.tolerance_factor))


def coalition_reward(jsr_values: Sequence[float], bands: Sequence[float],
                     working_bandwidth: float, env: EnvironmentConstants) -> float:
    """Sum of effect * suppression probability over coalition members."""
    jsr_arr = np.asarray(jsr_values, dtype=float)
    band_arr = np.asarray(bands, dtype=float)
    if jsr_arr.shape != band_arr.shape:
        raise ValueError("one band per member required")
    if jsr_arr.size == 0:
        return 0.0
    if np.any(band_arr <= 0):
        raise ValueError("coalition members must hold positive bandwidth")
    total = 0.0
    for j, b in zip(jsr_arr, band_arr):
        total += effect(jsr_bar(j, b), env) * suppression_probability(b, working_bandwidth)
    return total


def coalition_cost(size: int, n_uavs: int) -> float:
    """Fraction of the swarm committed to one radar."""
    if size < 0 or size > n_uavs:
        raise ValueError("coalition size must lie in [0, N]")
    return size / n_uavs


@dataclass(frozen=True)
class UtilityBreakdown:
    """Per-radar reward/cost/utility plus the threat-weighted total."""

    rewards: np.ndarray
    costs: np.ndarray
    utilities: np.ndarray
    total: float


def _reward_terms(jsr_arr: np.ndarray, bands: np.ndarray, working_bandwidth: float,
                  env: EnvironmentConstants) -> np.ndarray:
    """Vector form of effect * probability; a zero band contributes its limit, 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = (env.jsr_requirement * bands / jsr_arr) ** env.tolerance_factor
        terms = np.exp(-exponent) * bands / working_bandwidth
    return np.where(bands > 0, terms, 0.0)


def total_utility(assignment: TaskAssignment, allocation: BandwidthAllocation,
                  scenario: Scenario, target: TargetState,
                  jsr_table: np.ndarray | None = None) -> UtilityBreakdown:
    """Threat-weighted total utility of a schedule (feasibility not required).

    Candidate allocations from the inner optimiser may violate the cover
    equality; the reward formula is evaluated literally on whatever bands are
    present. Empty coalitions contribute exactly zero.
    """
    if allocation.grid.shape != (assignment.n_uavs, assignment.n_radars + 1):
        raise ValueError("assignment and allocation shapes disagree")
    if allocation.frame != assignment.frame:
        raise ValueError("assignment and allocation frames disagree")
    if jsr_table is None:
        jsr_table = scenario.jsr_table(target)
    lam = scenario.environment.cost_factor
    m_count = assignment.n_radars
    rewards = np.zeros(m_count)
    costs = np.zeros(m_count)
    for coalition in coalitions_of(assignment):
        if not coalition.members:
            continue
        m = coalition.radar - 1
        members = list(coalition.members)
        bands = allocation.grid[members, coalition.radar]
        rewards[m] = _reward_terms(jsr_table[members, m], bands,
                                   scenario.radars[m].working_bandwidth,
                                   scenario.environment).sum()
        costs[m] = coalition_cost(len(members), assignment.n_uavs)
    utilities = rewards - lam * costs
    total = float(scenario.threat_weights @ utilities)
    return UtilityBreakdown(rewards, costs, utilities, total)


def constraint_violation(assignment: TaskAssignment, allocation: BandwidthAllocation,
                         radars: Sequence[RadarParams]) -> float:
    """Degree of constraint violation in Hz: cover-equality mismatch plus box
    overruns, summed over radars with nonempty coalitions and their members.

    The outer max(0, |.|) on the equality term is redundant but kept to match
    the definition as printed.
    """
    total = 0.0
    for coalition in coalitions_of(assignment):
        if not coalition.members:
            continue
        bm = radars[coalition.radar - 1].working_bandwidth
        bands = allocation.grid[list(coalition.members), coalition.radar]
        total += max(0.0, abs(bands.sum() - bm))
        total += np.maximum(0.0, -bands).sum()
        total += np.maximum(0.0, bands - bm).sum()
    return float(total)


def scored_total_utility(assignment: TaskAssignment, allocation: BandwidthAllocation,
                         scenario: Scenario, target: TargetState,
                         believed_bandwidths: Sequence[float],
                         jsr_table: np.ndarray | None = None) -> UtilityBreakdown:
    """Score a schedule built from mis-estimated working bandwidths.

    The schedule covers the *believed* band; only the overlap with the true
    band jams anything. With an over-estimate the allocated bands dilute across
    excess spectrum; with an under-estimate a slice of the true band stays
    clear, and the radar only stays suppressed if all of its carrier hops in
    the frame land inside the covered part, so the coalition reward scales by
    coverage ** hops_per_frame.
    """
    if jsr_table is None:
        jsr_table = scenario.jsr_table(target)
    env = scenario.environment
    lam = env.cost_factor
    m_count = assignment.n_radars
    rewards = np.zeros(m_count)
    costs = np.zeros(m_count)
    for coalition in coalitions_of(assignment):
        if not coalition.members:
            continue
        m = coalition.radar - 1
        members = list(coalition.members)
        bands = allocation.grid[members, coalition.radar]
        believed = float(believed_bandwidths[m])
        true_bm = scenario.radars[m].working_bandwidth
        coverage = min(1.0, believed / true_bm)
        # quality over the covered part: bands normalised by the believed width
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.exp(-((env.jsr_requirement * bands / jsr_table[members, m])
                         ** env.tolerance_factor))
            quality = np.where(bands > 0, f * bands / believed, 0.0).sum()
        rewards[m] = quality * coverage ** env.hops_per_frame
        costs[m] = coalition_cost(len(members), assignment.n_uavs)
    utilities = rewards - lam * costs
    total = float(scenario.threat_weights @ utilities)
    return UtilityBreakdown(rewards, costs, utilities, total)
