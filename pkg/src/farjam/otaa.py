"""Outer task assignment: GA over assignments, screened by the Kriging model.

Each frame re-solves the mixed problem: a small GA population evolves by
tournament selection, crossover and mutation; every offspring is scored by
the surrogate; random immigrants displace the weakest predictions; and only
the best-predicted new assignment per iteration is sent to the inner
bandwidth optimiser for a true evaluation. Leftover budget walks single-task
moves of the incumbent. A small memory population carries good assignments
across frames; later frames run a shrunken iteration schedule.

True-evaluation budgets are counted in scalar utility calls inside the inner
optimiser (one full inner run costs Q * (generations + 1)); a frame's budget
is split evenly over its scheduled evaluations, so an undersized budget
starves every inner run rather than truncating the tail of the schedule.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kriging
from .ibaa import InnerConfig, optimize_bandwidth
from .kriging import EvaluatedPoint, EvaluationDataset, KrigingModel, lhs_initial_population
from .model import BandwidthAllocation, TaskAssignment
from .scenario import Scenario, TargetState
from .utility import total_utility

_TRAJECTORY_TAG = 101
_FRAME_TAG = 102
_EVAL_TAG = 103

#: evaluator signature: (tasks, frame, target, jsr_table, budget) -> EvaluatedPoint
Evaluator = Callable[[tuple[int, ...], int, TargetState, np.ndarray, "BudgetAccountant"],
                     EvaluatedPoint]


@dataclass
class OuterConfig:
    population_size: int = 6
    t_max: int = 400
    shrink_factor: float = 0.3            # iteration scale for frames >= 2
    memory_ratio: float = 0.1
    immigrant_ratio: float = 0.1
    memory_reset_range: tuple[int, int] = (5, 10)
    crossover_rate: float = 0.8
    mutation_rate: float | None = None    # default 1/N
    budget: int = 100_000_000             # frame-1 true-evaluation budget
    inner: InnerConfig = field(default_factory=InnerConfig)
    surrogate: bool = True                # False: evaluate every offspring truly
    dynamic_modules: bool = True          # False: no memory and no immigrants
    parent_selection: bool = True         # binary tournament on predicted utility
    elitism: bool = True                  # re-inject the best-known assignment
    local_refinement: bool = True         # spend leftover budget polishing the best
    kriging_reoptimize_every: int = 25

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("outer population needs at least 2 individuals")
        if not 0.0 < self.shrink_factor <= 1.0:
            raise ValueError("shrink factor must lie in (0, 1]")
        for name in ("memory_ratio", "immigrant_ratio"):
            if not 0.0 < getattr(self, name) < 0.5:
                raise ValueError(f"{name} must lie in (0, 0.5)")
        a, b = self.memory_reset_range
        if not (isinstance(a, int) and isinstance(b, int) and a <= b):
            raise ValueError("memory reset range must be integers a <= b")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.budget < 1:
            raise ValueError("budget must be positive")


class BudgetAccountant:
    """Monotone counter of true utility evaluations, safe to share."""

    def __init__(self, total: int) -> None:
        if total < 0:
            raise ValueError("budget must be non-negative")
        self.total = int(total)
        self.consumed = 0
        self._lock = threading.Lock()

    @property
    def remaining(self) -> int:
        return self.total - self.consumed

    @property
    def exhausted(self) -> bool:
        return self.consumed >= self.total

    def take_up_to(self, n: int) -> int:
        with self._lock:
            grant = min(n, self.total - self.consumed)
            self.consumed += grant
            return grant

    def try_take(self, n: int) -> bool:
        with self._lock:
            if self.total - self.consumed < n:
                return False
            self.consumed += n
            return True


class BudgetSlice:
    """Per-evaluation view of a shared budget, capped at an even share of the
    frame's scheduled evaluation count. Starving each inner run (rather than
    letting early runs spend freely) is what makes utility degrade, and
    feasibility eventually fail, when the schedule needs more evaluations than
    the budget holds."""

    def __init__(self, parent: BudgetAccountant, cap: int) -> None:
        self.parent = parent
        self.cap = int(cap)

    def take_up_to(self, n: int) -> int:
        grant = self.parent.take_up_to(min(n, self.cap))
        self.cap -= grant
        return grant

    def try_take(self, n: int) -> bool:
        if n > self.cap or not self.parent.try_take(n):
            return False
        self.cap -= n
        return True


@dataclass
class MemoryPopulation:
    """Elite assignments kept across frames; fresh slots start as random."""

    tasks: list[tuple[int, ...]]
    utilities: list[float]
    random_flags: list[bool]

    @classmethod
    def random(cls, size: int, n_uavs: int, n_tasks: int,
               rng: np.random.Generator) -> "MemoryPopulation":
        tasks = [tuple(int(v) for v in rng.integers(0, n_tasks, n_uavs))
                 for _ in range(size)]
        return cls(tasks, [float("-inf")] * size, [True] * size)

    def __len__(self) -> int:
        return len(self.tasks)


@dataclass
class FrameResult:
    frame: int
    assignment: TaskAssignment
    allocation: BandwidthAllocation
    utility: float
    violation: float
    feasible: bool
    truncated: bool
    evaluations: int
    ibaa_runs: int
    best_trace: list[float]
    wall_time: float


def make_ibaa_evaluator(scenario: Scenario, inner: InnerConfig, run_seed: int) -> Evaluator:
    """True evaluator: run the inner DE with a stream derived from the
    assignment itself, so re-evaluating an assignment reproduces its utility
    bit for bit regardless of call order."""

    def evaluate(tasks, frame, target, jsr_table, budget):
        rng = np.random.default_rng(
            np.random.SeedSequence([_EVAL_TAG, run_seed, frame, *tasks]))
        assignment = TaskAssignment.from_tasks(tasks, scenario.n_radars, frame)
        res = optimize_bandwidth(assignment, scenario, target, inner, rng,
                                 budget=budget, jsr_table=jsr_table)
        return EvaluatedPoint(tuple(tasks), res.utility, res.allocation.grid,
                              res.violation, res.feasible, res.truncated)

    return evaluate


def make_equal_split_evaluator(scenario: Scenario) -> Evaluator:
    """Baseline evaluator: each coalition splits its radar's band evenly."""

    def evaluate(tasks, frame, target, jsr_table, budget):
        if budget is not None and not budget.try_take(1):
            return EvaluatedPoint(tuple(tasks), float("-inf"), None,
                                  float("inf"), False, True)
        assignment = TaskAssignment.from_tasks(tasks, scenario.n_radars, frame)
        alloc = BandwidthAllocation.zeros(scenario.n_uavs, scenario.n_radars, frame)
        counts = np.bincount(assignment.as_array(), minlength=scenario.n_radars + 1)
        for n, t in enumerate(tasks):
            if t > 0:
                alloc.grid[n, t] = scenario.radars[t - 1].working_bandwidth / counts[t]
        breakdown = total_utility(assignment, alloc, scenario, target, jsr_table)
        return EvaluatedPoint(tuple(tasks), breakdown.total, alloc.grid, 0.0, True, False)

    return evaluate


def tournament_selection(population: np.ndarray, fitness: np.ndarray,
                         rng: np.random.Generator) -> np.ndarray:
    """Binary tournament: each offspring slot takes the better of two random
    parents. Without it the population is pure drift and the search saturates
    far below the optimum."""
    a = rng.integers(0, population.shape[0], population.shape[0])
    b = rng.integers(0, population.shape[0], population.shape[0])
    winners = np.where(fitness[a] >= fitness[b], a, b)
    return population[winners]


def ga_step(population: np.ndarray, crossover_rate: float, mutation_rate: float,
            n_tasks: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform crossover over shuffled pairs, then per-gene uniform mutation.

    Offspring stay valid by construction: genes are task indices.
    """
    out = population.copy()
    count, n = out.shape
    order = rng.permutation(count)
    for i in range(0, count - 1, 2):
        a, b = order[i], order[i + 1]
        if rng.random() < crossover_rate:
            swap = rng.random(n) < 0.5
            tmp = out[a, swap].copy()
            out[a, swap] = out[b, swap]
            out[b, swap] = tmp
    mutate = rng.random(out.shape) < mutation_rate
    out[mutate] = rng.integers(0, n_tasks, int(mutate.sum()))
    return out


def memory_update(memory: MemoryPopulation, best_tasks: tuple[int, ...],
                  best_utility: float, t: int, rng: np.random.Generator,
                  reset_range: tuple[int, int]) -> int:
    """Most-similar memory update; returns the next update time t + rand(a, b).

    A still-random slot (if any) is overwritten outright; otherwise the best
    assignment replaces its nearest memory entry (Hamming distance, ties to
    the lowest index) only if strictly better.
    """
    if len(memory) > 0:
        flagged = [i for i, f in enumerate(memory.random_flags) if f]
        if flagged:
            slot = int(rng.choice(flagged))
            memory.tasks[slot] = tuple(best_tasks)
            memory.utilities[slot] = best_utility
            memory.random_flags[slot] = False
        else:
            best_arr = np.array(best_tasks)
            distances = [int(np.sum(best_arr != np.array(m))) for m in memory.tasks]
            closest = int(np.argmin(distances))
            if best_utility > memory.utilities[closest]:
                memory.tasks[closest] = tuple(best_tasks)
                memory.utilities[closest] = best_utility
    a, b = reset_range
    return t + int(rng.integers(a, b + 1))


def random_immigrants(population: np.ndarray, predictions: np.ndarray,
                      immigrant_ratio: float, n_tasks: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Replace the ceil(r2 * P) lowest-predicted rows with fresh random ones.

    Returns the replaced row indices; the caller re-predicts them.
    """
    if predictions.shape[0] != population.shape[0]:
        raise ValueError("one prediction per individual required")
    count = math.ceil(immigrant_ratio * population.shape[0])
    replaced = np.argsort(predictions, kind="stable")[:count]
    population[replaced] = rng.integers(0, n_tasks, (count, population.shape[1]))
    return replaced


def solve_frame(frame: int, scenario: Scenario, target: TargetState,
                memory: MemoryPopulation | None, cfg: OuterConfig,
                rng: np.random.Generator, evaluator: Evaluator | None = None,
                budget: BudgetAccountant | None = None,
                t_max: int | None = None) -> tuple[FrameResult, MemoryPopulation | None]:
    """One frame of the outer algorithm; returns the frame result and the
    end-of-frame memory to carry forward."""
    start = time.perf_counter()
    n, m = scenario.n_uavs, scenario.n_radars
    n_tasks = m + 1
    p = cfg.population_size
    mutation_rate = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / n
    t_max = cfg.t_max if t_max is None else t_max
    budget = budget if budget is not None else BudgetAccountant(cfg.budget)
    evaluator = evaluator or make_ibaa_evaluator(scenario, cfg.inner, 0)
    jsr_table = scenario.jsr_table(target)

    dataset = EvaluationDataset()
    ibaa_runs = 0
    truncated = False

    # the frame budget is split evenly over the scheduled evaluation count, so
    # an undersized budget degrades every inner run instead of cutting off the
    # tail of the schedule
    per_iter = 1 if cfg.surrogate else p + (math.ceil(cfg.immigrant_ratio * p)
                                            if cfg.dynamic_modules else 0)
    scheduled = p + (math.ceil(cfg.memory_ratio * p) if cfg.dynamic_modules else 0) \
        + (t_max + 1) * per_iter
    slice_cap = max(cfg.inner.population_size, budget.total // scheduled)

    def evaluate_into_dataset(tasks: tuple[int, ...]) -> EvaluatedPoint | None:
        nonlocal ibaa_runs, truncated
        cached = dataset.get(tasks)
        if cached is not None:
            return cached
        point = evaluator(tasks, frame, target, jsr_table, BudgetSlice(budget, slice_cap))
        if not np.isfinite(point.utility):
            truncated = True
            return None
        ibaa_runs += 1
        truncated = truncated or point.truncated
        dataset.add(point)
        return point

    # initial pool: LHS sample, merged with the re-evaluated memory when present
    pool = list(lhs_initial_population(p, n, n_tasks, rng))
    carried = memory if (cfg.dynamic_modules and memory is not None) else None
    if carried is not None:
        pool += list(carried.tasks)
    evaluated: list[EvaluatedPoint] = []
    for tasks in pool:
        point = evaluate_into_dataset(tasks)
        if point is not None and all(point.tasks != q.tasks for q in evaluated):
            evaluated.append(point)
        if budget.exhausted:
            truncated = True
            break
    if carried is not None:
        for i, tasks in enumerate(carried.tasks):
            point = dataset.get(tasks)
            if point is not None:
                carried.utilities[i] = point.utility

    if len(dataset) == 0:
        raise ValueError("budget too small to evaluate a single assignment")

    evaluated.sort(key=lambda q: (not q.feasible, -q.utility))
    population = np.array([q.tasks for q in evaluated[:p]], dtype=int)
    if population.shape[0] < p:       # degenerate truncation: pad with repeats
        pad = population[np.zeros(p - population.shape[0], dtype=int)]
        population = np.vstack([population, pad])

    if cfg.dynamic_modules:
        if carried is None:
            carried = MemoryPopulation.random(math.ceil(cfg.memory_ratio * p),
                                              n, n_tasks, rng)
            for i, tasks in enumerate(carried.tasks):
                point = evaluate_into_dataset(tasks)
                if point is not None:
                    carried.utilities[i] = point.utility
                if budget.exhausted:
                    truncated = True
                    break
        t_m = int(rng.integers(cfg.memory_reset_range[0], cfg.memory_reset_range[1] + 1))

    model: KrigingModel | None = None
    if cfg.surrogate and len(dataset) >= 2:
        model = kriging.fit(dataset, rng)

    best_trace = [dataset.best().utility]
    updates = 0

    for t in range(t_max + 1):
        if budget.exhausted:
            truncated = True
            break
        if cfg.dynamic_modules and carried is not None and len(carried) and t == t_m:
            best_point = dataset.best()
            t_m = memory_update(carried, best_point.tasks, best_point.utility,
                                t, rng, cfg.memory_reset_range)

        if cfg.parent_selection:
            if cfg.surrogate and model is not None:
                fitness = model.predict(population.astype(float))
            else:
                known = [dataset.get(tuple(int(v) for v in row)) for row in population]
                fitness = np.array([p.utility if p is not None else float("-inf")
                                    for p in known])
            population = tournament_selection(population, fitness, rng)
        population = ga_step(population, cfg.crossover_rate, mutation_rate, n_tasks, rng)

        if cfg.surrogate and model is not None:
            predictions = model.predict(population.astype(float))
            if cfg.dynamic_modules:
                replaced = random_immigrants(population, predictions,
                                             cfg.immigrant_ratio, n_tasks, rng)
                predictions[replaced] = model.predict(population[replaced].astype(float))
            if cfg.elitism:
                # keep the incumbent in the gene pool so its neighbourhood
                # stays reachable by crossover and mutation
                slot = int(np.argmin(predictions))
                population[slot] = dataset.best().tasks
                predictions[slot] = model.predict(population[slot:slot + 1].astype(float))[0]
            # evaluating a known assignment adds nothing under the uniqueness
            # rule, so spend the budget on the best-predicted new candidate
            novel = np.array([tuple(int(v) for v in row) not in dataset
                              for row in population])
            if novel.any():
                pick = int(np.argmax(np.where(novel, predictions, -np.inf)))
                cand = tuple(int(v) for v in population[pick])
                point = evaluate_into_dataset(cand)
                if point is not None:
                    updates += 1
                    reopt = updates % cfg.kriging_reoptimize_every == 0
                    model = kriging.update(dataset, model, point, rng, reoptimize=reopt)
        else:
            # no surrogate: every new offspring is evaluated truly
            utilities = np.empty(population.shape[0])
            for i, row in enumerate(population):
                point = evaluate_into_dataset(tuple(int(v) for v in row))
                utilities[i] = point.utility if point is not None else float("-inf")
                if budget.exhausted:
                    break
            if cfg.dynamic_modules and not budget.exhausted:
                replaced = random_immigrants(population, utilities,
                                             cfg.immigrant_ratio, n_tasks, rng)
                for i in replaced:
                    evaluate_into_dataset(tuple(int(v) for v in population[i]))
                    if budget.exhausted:
                        break

        best_trace.append(dataset.best().utility)

    if cfg.local_refinement:
        # walk single-task moves from the incumbent on whatever budget is
        # left; margins between neighbouring assignments can be razor thin.
        # The even-split utility of a move is a cheap true lower bound (one
        # evaluation unit), so it ranks the candidates; only the most
        # promising ones pay the full sliced evaluation price.
        split_eval = make_equal_split_evaluator(scenario)
        patience = 12
        improved = True
        while improved and not budget.exhausted:
            incumbent = dataset.best()
            improved = False
            base = list(incumbent.tasks)
            neighbours = [tuple(base[:i] + [task] + base[i + 1:])
                          for i in range(n) for task in range(n_tasks)
                          if task != base[i]]
            neighbours = [c for c in neighbours if c not in dataset]
            bounds = []
            for cand in neighbours:
                probe = split_eval(cand, frame, target, jsr_table, budget)
                if not np.isfinite(probe.utility):
                    break
                bounds.append(probe.utility)
            if len(bounds) < len(neighbours):
                truncated = True
                break
            order = np.argsort(-np.array(bounds), kind="stable") if bounds else []
            for rank, i in enumerate(order):
                if rank >= patience:
                    break
                point = evaluate_into_dataset(neighbours[int(i)])
                if point is None or budget.exhausted:
                    break
                if point.feasible and point.utility > incumbent.utility:
                    improved = True
                    break
            best_trace.append(dataset.best().utility)

    best = dataset.best()
    assignment = TaskAssignment.from_tasks(best.tasks, m, frame)
    allocation = BandwidthAllocation(np.array(best.bandwidth, dtype=float), frame)
    result = FrameResult(frame, assignment, allocation, best.utility, best.violation,
                         best.feasible, truncated, budget.consumed, ibaa_runs,
                         best_trace, time.perf_counter() - start)
    return result, carried


def run_scenario(scenario: Scenario, cfg: OuterConfig, frames: int, seed: int,
                 trajectory: Sequence[TargetState] | None = None,
                 evaluator: Evaluator | None = None) -> list[FrameResult]:
    """Solve frames 1..K sequentially, carrying memory forward.

    Frame 1 runs the full iteration and evaluation budget; later frames run
    both scaled by the shrink factor. The target trajectory is drawn once per
    run (or supplied, so competing algorithms can share it).
    """
    if frames < 1:
        raise ValueError("need at least one frame")
    if trajectory is None:
        traj_rng = np.random.default_rng(np.random.SeedSequence([_TRAJECTORY_TAG, seed]))
        trajectory = scenario.target_trajectory(frames, traj_rng)
    if len(trajectory) < frames:
        raise ValueError("trajectory shorter than the requested frame count")
    evaluator = evaluator or make_ibaa_evaluator(scenario, cfg.inner, seed)

    results: list[FrameResult] = []
    memory: MemoryPopulation | None = None
    for k in range(1, frames + 1):
        scale = 1.0 if k == 1 else cfg.shrink_factor
        t_max_k = max(1, round(scale * cfg.t_max))
        # only the iteration schedule shrinks on later frames; each frame's
        # evaluation budget stays at the configured O so that a converged
        # shrunken schedule matches the full one instead of starving
        budget_k = BudgetAccountant(cfg.budget)
        rng_k = np.random.default_rng(np.random.SeedSequence([_FRAME_TAG, seed, k]))
        result, memory = solve_frame(k, scenario, trajectory[k - 1], memory, cfg,
                                     rng_k, evaluator, budget_k, t_max_k)
        results.append(result)
    return results
