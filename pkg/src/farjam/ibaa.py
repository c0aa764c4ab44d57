"""Inner bandwidth allocation: constrained differential evolution (FROFI style).

Given a fixed task assignment, the free variables are the bandwidths of the
working UAVs (one per working UAV, bounded by the assigned radar's working
bandwidth). Selection follows the feasibility rule - lower constraint
violation wins, utility breaks ties - while an archive of high-utility
infeasible trials feeds a replacement step and a rescue mutation keeps a
fully infeasible population moving. Out-of-box trial coordinates bounce back
to the midpoint between the parent and the bound, and per-radar cover errors
inside the feasibility tolerance count as zero violation; both choices keep
the population from freezing into identical exact-sum copies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import _kernels
from .model import BandwidthAllocation, FEASIBILITY_RTOL, TaskAssignment
from .scenario import Scenario, TargetState


class Budget(Protocol):
    """Shared evaluation budget; implementations must be safe to share."""

    def take_up_to(self, n: int) -> int: ...
    def try_take(self, n: int) -> bool: ...


@dataclass
class InnerConfig:
    population_size: int = 40
    max_generations: int = 100
    generations_per_dim: int | None = 15  # None: flat max_generations
    scaling_factor: float = 0.6
    crossover_rate: float = 0.95
    rescue_probability: float = 0.1
    archive_capacity: int | None = None   # default population_size // 10
    equal_split_fallback: bool = True     # completed runs never lose to the even split
    trace: bool = False

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ValueError("DE mutation needs a population of at least 4")
        if not 0.0 < self.scaling_factor <= 1.0:
            raise ValueError("scaling factor must lie in (0, 1]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.archive_capacity is None:
            # unbounded injection of high-utility infeasible trials stalls the
            # equality constraint; keep only the strongest few per generation
            self.archive_capacity = max(1, self.population_size // 10)

    def generations(self, dim: int) -> int:
        """Generation budget; wide coalitions get proportionally more."""
        if self.generations_per_dim is None:
            return self.max_generations
        return max(self.max_generations, self.generations_per_dim * dim)


@dataclass
class InnerResult:
    allocation: BandwidthAllocation
    utility: float
    violation: float
    feasible: bool
    truncated: bool
    evaluations: int
    trace: list[tuple[int, float, float]] | None = None


#: per-radar sum errors inside the feasibility tolerance count as zero
#: violation, so candidates on the cover simplex compete on utility; the
#: printed equality is only ever attainable to float precision anyway
_VIOLATION_SNAP_RTOL = FEASIBILITY_RTOL


class _Layout:
    """Free-variable layout of one assignment plus a vectorised evaluator.

    One column per working UAV, grouped by assigned radar.
    """

    def __init__(self, assignment: TaskAssignment, scenario: Scenario,
                 jsr_table: np.ndarray) -> None:
        self.assignment = assignment
        self.scenario = scenario
        self.columns = [(n, t) for n, t in enumerate(assignment.tasks) if t > 0]
        self.dim = len(self.columns)
        env = scenario.environment
        weights = scenario.threat_weights
        self.col_jsr = np.array([jsr_table[n, m - 1] for n, m in self.columns])
        self.col_ub = np.array([scenario.radars[m - 1].working_bandwidth
                                for _, m in self.columns])
        radars_used = sorted({m for _, m in self.columns})
        self.group_bm = np.array([scenario.radars[m - 1].working_bandwidth
                                  for m in radars_used])
        self.member_mat = np.zeros((self.dim, len(radars_used)))
        self.gid = np.empty(self.dim, dtype=np.int64)
        for i, (_, m) in enumerate(self.columns):
            self.member_mat[i, radars_used.index(m)] = 1.0
            self.gid[i] = radars_used.index(m)
        # column scale folds the threat weight and the 1/B_m of its radar
        col_w = np.array([weights[m - 1] for _, m in self.columns])
        self.col_scale = col_w / self.col_ub
        sizes = self.member_mat.sum(axis=0)
        group_w = np.array([weights[m - 1] for m in radars_used])
        self.fixed_utility = float(-(group_w * env.cost_factor * sizes).sum()
                                   / scenario.n_uavs) if self.dim else 0.0
        self.jsr_requirement = env.jsr_requirement
        self.tolerance_factor = env.tolerance_factor
        self.snap = _VIOLATION_SNAP_RTOL * self.group_bm

    def evaluate(self, pop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Utilities and constraint violations of a (Q, dim) population."""
        pop = np.ascontiguousarray(pop, dtype=float)
        if _kernels.HAVE_NUMBA:
            utility = np.empty(pop.shape[0])
            violation = np.empty(pop.shape[0])
            _kernels.evaluate_into(pop, self.col_jsr, self.col_scale, self.col_ub,
                                   self.gid, self.group_bm, self.snap,
                                   self.fixed_utility, self.jsr_requirement,
                                   self.tolerance_factor, utility, violation)
            return utility, violation
        exponent = self.jsr_requirement * pop / self.col_jsr
        if self.tolerance_factor != 1.0:
            exponent = exponent ** self.tolerance_factor
        utility = self.fixed_utility + (np.exp(-exponent) * pop) @ self.col_scale
        err = np.abs(pop @ self.member_mat - self.group_bm)
        err[err < self.snap] = 0.0
        violation = err.sum(axis=1)
        violation += np.where(pop > self.col_ub, pop - self.col_ub, 0.0).sum(axis=1)
        violation += np.where(pop < 0.0, -pop, 0.0).sum(axis=1)
        return utility, violation

    def to_allocation(self, vec: np.ndarray) -> BandwidthAllocation:
        alloc = BandwidthAllocation.zeros(self.assignment.n_uavs,
                                          self.assignment.n_radars,
                                          self.assignment.frame)
        for (n, m), b in zip(self.columns, vec):
            alloc.grid[n, m] = b
        return alloc

    def feasible(self, violation: float) -> bool:
        tol = FEASIBILITY_RTOL * self.group_bm.min() if self.dim else 0.0
        return violation <= tol


def mutate(population: np.ndarray, q: int, best: int, variant: str,
           scaling_factor: float, rng: np.random.Generator) -> np.ndarray:
    """One DE mutant: rand-variant is base + F(r1-base) + F(r2-r3); best-variant
    is r1 + F(best-r1) + F(r2-r3). Partners are distinct from each other and q."""
    size = population.shape[0]
    partners = rng.choice([i for i in range(size) if i != q], size=3, replace=False)
    q1, q2, q3 = (int(i) for i in partners)
    diff = scaling_factor * (population[q2] - population[q3])
    if variant == "rand":
        return population[q] + scaling_factor * (population[q1] - population[q]) + diff
    if variant == "best":
        return population[q1] + scaling_factor * (population[best] - population[q1]) + diff
    raise ValueError(f"unknown mutation variant {variant!r}")


def crossover(target: np.ndarray, mutant: np.ndarray, crossover_rate: float,
              rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover; the forced coordinate always comes from the mutant."""
    if target.shape != mutant.shape:
        raise ValueError("target and mutant shapes disagree")
    take = rng.random(target.size) <= crossover_rate
    take[rng.integers(0, target.size)] = True
    return np.where(take, mutant, target)


def select(target: tuple[float, float], trial: tuple[float, float]) -> tuple[bool, bool]:
    """Feasibility-rule duel on (utility, violation) pairs.

    Returns (trial survives, trial is archived): smaller violation wins, equal
    violations compare on utility with ties going to the trial; a trial that
    loses on violation but strictly improves utility goes to the archive.
    """
    u_t, g_t = target
    u_w, g_w = trial
    if g_w < g_t:
        return True, False
    if g_w == g_t:
        return u_w >= u_t, False
    return False, u_w > u_t


def frofi_replacement(population: np.ndarray, utilities: np.ndarray,
                      violations: np.ndarray,
                      archive: list[tuple[np.ndarray, float, float]]) -> None:
    """Let archived high-utility infeasible trials displace the most-violating
    member of their utility segment, when they beat it on utility."""
    if not archive:
        return
    size = population.shape[0]
    order = np.argsort(-utilities, kind="stable")
    n_parts = min(len(archive), size)
    part_size = math.ceil(size / n_parts)
    for i, (vec, u_a, g_a) in enumerate(archive[:n_parts]):
        part = order[i * part_size:(i + 1) * part_size]
        if part.size == 0:
            continue
        j = part[np.argmax(violations[part])]
        if u_a > utilities[j]:
            population[j] = vec
            utilities[j] = u_a
            violations[j] = g_a


def frofi_mutation_strategy(population: np.ndarray, utilities: np.ndarray,
                            violations: np.ndarray, upper: np.ndarray,
                            probability: float, rng: np.random.Generator,
                            layout: _Layout) -> int:
    """When every individual is infeasible, occasionally restart the worst one
    at a fresh uniform point. Returns the number of evaluations spent."""
    if np.any(violations <= 0.0) or rng.random() >= probability:
        return 0
    j = int(np.argmax(violations))
    population[j] = rng.random(upper.size) * upper
    u, g = layout.evaluate(population[j:j + 1])
    utilities[j] = u[0]
    violations[j] = g[0]
    return 1


def _rule_argbest(utilities: np.ndarray, violations: np.ndarray) -> int:
    feasible = violations == 0.0
    if feasible.any():
        return int(np.argmax(np.where(feasible, utilities, -np.inf)))
    return int(np.argmin(violations))


def _generation(pop: np.ndarray, utilities: np.ndarray, violations: np.ndarray,
                q_raw: np.ndarray, floats: np.ndarray, cfg: InnerConfig,
                layout: _Layout) -> bool:
    """One DE generation in place; returns True when no individual is feasible.

    Randomness is pre-drawn by the caller: `q_raw[q]` encodes the three
    distinct partner picks, `floats[q]` the crossover uniforms plus the
    mutation-variant coin and the forced coordinate. Mutation alternates the
    rand- and best-based donors, crossover is binomial with a forced
    coordinate, and out-of-box coordinates bounce back to the midpoint between
    the parent and the bound (hard clipping collapses whole basins onto the
    same exact-sum vertex and stalls the search in identical copies).
    """
    if _kernels.HAVE_NUMBA:
        return bool(_kernels.de_generation(
            pop, utilities, violations, q_raw, floats, cfg.crossover_rate,
            cfg.scaling_factor, layout.col_jsr, layout.col_scale, layout.col_ub,
            layout.gid, layout.group_bm, layout.snap, layout.fixed_utility,
            layout.jsr_requirement, layout.tolerance_factor, cfg.archive_capacity))

    size, dim = pop.shape
    idx = np.arange(size)
    q1 = q_raw % (size - 1)
    rest = q_raw // (size - 1)
    q2 = rest % (size - 2)
    q3 = rest // (size - 2)
    q1 = q1 + (q1 >= idx)
    lo = np.minimum(idx, q1)
    hi = np.maximum(idx, q1)
    q2 = q2 + (q2 >= lo)
    q2 += q2 >= hi
    for row in np.sort(np.stack([idx, q1, q2]), axis=0):
        q3 = q3 + (q3 >= row)

    pop_best = _rule_argbest(utilities, violations)
    diff = cfg.scaling_factor * (pop[q2] - pop[q3])
    rand_variant = pop + cfg.scaling_factor * (pop[q1] - pop) + diff
    best_variant = pop[q1] + cfg.scaling_factor * (pop[pop_best] - pop[q1]) + diff
    use_best = floats[:, dim] < 0.5
    mutants = np.where(use_best[:, None], best_variant, rand_variant)

    take = floats[:, :dim] <= cfg.crossover_rate
    take[idx, (floats[:, dim + 1] * dim).astype(int)] = True
    trials = np.where(take, mutants, pop)
    trials = np.where(trials > layout.col_ub, (pop + layout.col_ub) / 2.0, trials)
    trials = np.where(trials < 0.0, pop / 2.0, trials)

    trial_u, trial_g = layout.evaluate(trials)
    survives = (trial_g < violations) | ((trial_g == violations) & (trial_u >= utilities))
    to_archive = (trial_g > violations) & (trial_u > utilities)
    archive = [(trials[q].copy(), float(trial_u[q]), float(trial_g[q]))
               for q in np.flatnonzero(to_archive)]
    archive.sort(key=lambda entry: -entry[1])
    archive = archive[:cfg.archive_capacity]
    pop[survives] = trials[survives]
    utilities[survives] = trial_u[survives]
    violations[survives] = trial_g[survives]

    frofi_replacement(pop, utilities, violations, archive)
    return bool(np.all(violations > 0.0))


def optimize_bandwidth(assignment: TaskAssignment, scenario: Scenario,
                       target: TargetState, cfg: InnerConfig,
                       rng: np.random.Generator, budget: Budget | None = None,
                       jsr_table: np.ndarray | None = None) -> InnerResult:
    """Best feasible bandwidth allocation for one assignment, by DE.

    Consumes one budget unit per candidate utility evaluation (nominally
    Q * (max_generations + 1) per run). If the budget runs dry mid-run, the
    best individual so far is returned flagged truncated.
    """
    if jsr_table is None:
        jsr_table = scenario.jsr_table(target)
    layout = _Layout(assignment, scenario, jsr_table)
    trace: list[tuple[int, float, float]] | None = [] if cfg.trace else None
    if layout.dim == 0:
        return InnerResult(layout.to_allocation(np.empty(0)), 0.0, 0.0,
                           feasible=True, truncated=False, evaluations=0, trace=trace)

    size = cfg.population_size
    evaluations = 0

    def random_population(count: int) -> np.ndarray:
        """Random directions scaled to a random multiple of each radar's band:
        generically infeasible, but not hopelessly far from the cover simplex."""
        raw = rng.random((count, layout.dim))
        sums = raw @ layout.member_mat
        scale = rng.uniform(0.5, 1.5, (count, layout.member_mat.shape[1]))
        factors = (layout.group_bm * scale / np.maximum(sums, 1e-12)) @ layout.member_mat.T
        return raw * factors

    grant = size if budget is None else budget.take_up_to(size)
    if grant == 0:
        # nothing affordable: hand back an unevaluated random candidate
        vec = random_population(1)[0]
        return InnerResult(layout.to_allocation(vec), float("-inf"), float("inf"),
                           feasible=False, truncated=True, evaluations=0, trace=trace)

    pop = random_population(size)
    if grant < size:
        pop = pop[:grant]
        utilities, violations = layout.evaluate(pop)
        best = _rule_argbest(utilities, violations)
        return InnerResult(layout.to_allocation(pop[best]), float(utilities[best]),
                           float(violations[best]), layout.feasible(violations[best]),
                           truncated=True, evaluations=grant, trace=trace)
    utilities, violations = layout.evaluate(pop)
    evaluations += size

    best = _rule_argbest(utilities, violations)
    best_vec = pop[best].copy()
    best_u, best_g = float(utilities[best]), float(violations[best])
    if trace is not None:
        trace.append((0, best_u, best_g))

    truncated = False
    partner_space = (size - 1) * (size - 2) * (size - 3)
    for gen in range(1, cfg.generations(layout.dim) + 1):
        if budget is not None and not budget.try_take(size):
            truncated = True
            break

        q_raw = rng.integers(0, partner_space, size)
        floats = rng.random((size, layout.dim + 2))
        all_infeasible = _generation(pop, utilities, violations, q_raw, floats,
                                     cfg, layout)
        evaluations += size

        if all_infeasible and rng.random() < cfg.rescue_probability:
            if budget is None or budget.try_take(1):
                j = int(np.argmax(violations))
                pop[j] = rng.random(layout.dim) * layout.col_ub
                new_u, new_g = layout.evaluate(pop[j:j + 1])
                utilities[j], violations[j] = new_u[0], new_g[0]
                evaluations += 1
            else:
                truncated = True
                break

        cand = _rule_argbest(utilities, violations)
        survives_duel, _ = select((best_u, best_g),
                                  (float(utilities[cand]), float(violations[cand])))
        if survives_duel:
            best_vec = pop[cand].copy()
            best_u, best_g = float(utilities[cand]), float(violations[cand])
        if trace is not None:
            trace.append((gen, best_u, best_g))

    if cfg.equal_split_fallback and not truncated:
        # a completed run is never worse than the always-feasible even split;
        # truncated runs keep their honest, possibly infeasible, best
        if budget is None or budget.try_take(1):
            evaluations += 1
            sizes = layout.member_mat.sum(axis=0)
            fallback = (layout.group_bm / sizes) @ layout.member_mat.T
            fb_u, fb_g = layout.evaluate(fallback[None, :])
            survives_duel, _ = select((best_u, best_g), (float(fb_u[0]), float(fb_g[0])))
            if survives_duel:
                best_vec = fallback
                best_u, best_g = float(fb_u[0]), float(fb_g[0])
        else:
            truncated = True

    return InnerResult(layout.to_allocation(best_vec), best_u, best_g,
                       feasible=layout.feasible(best_g), truncated=truncated,
                       evaluations=evaluations, trace=trace)


def write_trace_csv(path, trace: list[tuple[int, float, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "best_utility", "best_violation"])
        for row in trace:
            writer.writerow([row[0], repr(row[1]), repr(row[2])])
