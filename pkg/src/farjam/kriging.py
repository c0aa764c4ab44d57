"""Surrogate over task assignments: ordinary Kriging with a Gaussian kernel.

Assignments enter as their length-N task-index vectors. The model
interpolates (no nugget); duplicate inputs are excluded by the dataset's
uniqueness test instead. Correlation hyperparameters are per-dimension and
fitted by maximising the concentrated log-likelihood within fixed bounds.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.optimize import minimize

log = logging.getLogger(__name__)

THETA_BOUNDS = (1e-3, 1e2)
MLE_RESTARTS = 3


@dataclass(frozen=True)
class EvaluatedPoint:
    """One truly evaluated assignment: tasks, its best schedule and utility."""

    tasks: tuple[int, ...]
    utility: float
    bandwidth: np.ndarray
    violation: float = 0.0
    feasible: bool = True
    truncated: bool = False


class EvaluationDataset:
    """Unique evaluated assignments of one frame, in insertion order."""

    def __init__(self) -> None:
        self.points: list[EvaluatedPoint] = []
        self._index: dict[tuple[int, ...], int] = {}

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, tasks: tuple[int, ...]) -> bool:
        return tuple(tasks) in self._index

    def get(self, tasks) -> EvaluatedPoint | None:
        i = self._index.get(tuple(tasks))
        return None if i is None else self.points[i]

    def add(self, point: EvaluatedPoint) -> bool:
        """Insert unless an identical assignment is already stored."""
        if point.tasks in self._index:
            return False
        self._index[point.tasks] = len(self.points)
        self.points.append(point)
        return True

    def best(self) -> EvaluatedPoint:
        """Best stored point by the feasibility rule: feasible ones compare on
        utility, otherwise the least-violating point wins."""
        if not self.points:
            raise ValueError("empty dataset")
        feasible = [p for p in self.points if p.feasible]
        if feasible:
            return max(feasible, key=lambda p: p.utility)
        return min(self.points, key=lambda p: p.violation)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([p.tasks for p in self.points], dtype=float)
        y = np.array([p.utility for p in self.points])
        return x, y

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            n = len(self.points[0].tasks) if self.points else 0
            writer.writerow([f"task_uav{i + 1}" for i in range(n)] + ["utility"])
            for p in self.points:
                writer.writerow(list(p.tasks) + [repr(p.utility)])


def lhs_initial_population(count: int, n_uavs: int, n_tasks: int,
                           rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Latin-hypercube sample of `count` distinct assignments.

    Each UAV dimension is stratified over the task indices {0..n_tasks-1} as
    evenly as `count` permits; collisions between individuals are re-drawn
    uniformly (bounded retries).
    """
    if count < 1:
        raise ValueError("population size must be >= 1")
    if count > n_tasks ** n_uavs:
        raise ValueError(f"cannot draw {count} distinct assignments from a "
                         f"space of {n_tasks ** n_uavs}")
    strata = np.empty((count, n_uavs))
    for d in range(n_uavs):
        strata[:, d] = rng.permutation(count) + rng.random(count)
    sample = np.floor(strata / count * n_tasks).astype(int)
    sample = np.minimum(sample, n_tasks - 1)

    out: list[tuple[int, ...]] = [tuple(int(v) for v in row) for row in sample]
    for _ in range(200 * count):
        seen = {t: i for i, t in enumerate(out)}
        if len(seen) == count:
            return out
        for i in range(count):
            if seen.get(out[i]) != i:      # a later duplicate of an earlier row
                out[i] = tuple(int(v) for v in rng.integers(0, n_tasks, n_uavs))
    raise RuntimeError("could not de-duplicate the initial population")


def _neg_log_likelihood(log10_theta: np.ndarray, sqdiff: np.ndarray,
                        y: np.ndarray) -> float:
    n = y.size
    theta = 10.0 ** log10_theta
    corr = np.exp(-(sqdiff @ theta)).reshape(n, n)
    try:
        factor = cho_factor(corr, lower=True, check_finite=False)
    except LinAlgError:
        return 1e25
    ones = np.ones(n)
    ri_ones = cho_solve(factor, ones, check_finite=False)
    ri_y = cho_solve(factor, y, check_finite=False)
    mu = (ones @ ri_y) / (ones @ ri_ones)
    resid = y - mu
    sigma2 = max(float(resid @ cho_solve(factor, resid, check_finite=False)) / n, 1e-300)
    logdet = 2.0 * np.log(np.diag(factor[0])).sum()
    return n * np.log(sigma2) + logdet


@dataclass
class KrigingModel:
    """Ordinary-Kriging interpolant (constant trend, Gaussian correlation)."""

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    mu: float
    sigma2: float
    alpha: np.ndarray = field(repr=False)
    jittered: bool = False

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray, rng: np.random.Generator,
            theta0: np.ndarray | None = None, restarts: int = MLE_RESTARTS) -> "KrigingModel":
        """Fit to >= 2 unique points; `restarts` extra random MLE starts."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = x.shape
        if n < 2:
            raise ValueError("Kriging needs at least two points")
        diff = x[:, None, :] - x[None, :, :]
        sqdiff = (diff * diff).reshape(n * n, d)
        lo, hi = np.log10(THETA_BOUNDS[0]), np.log10(THETA_BOUNDS[1])
        starts = []
        if theta0 is not None:
            starts.append(np.clip(np.log10(theta0), lo, hi))
        else:
            starts.append(np.full(d, -1.0))      # theta = 0.1, a mild default
        starts += [rng.uniform(lo, hi, d) for _ in range(restarts)]
        best_val, best_log_theta = np.inf, starts[0]
        for s in starts:
            res = minimize(_neg_log_likelihood, s, args=(sqdiff, y),
                           method="L-BFGS-B", bounds=[(lo, hi)] * d)
            if res.fun < best_val:
                best_val, best_log_theta = res.fun, res.x
        return cls._assemble(x, y, 10.0 ** best_log_theta)

    @classmethod
    def _assemble(cls, x: np.ndarray, y: np.ndarray, theta: np.ndarray) -> "KrigingModel":
        n = y.size
        diff = x[:, None, :] - x[None, :, :]
        corr = np.exp(-((diff * diff) @ theta))
        jittered = False
        try:
            factor = cho_factor(corr, lower=True, check_finite=False)
        except LinAlgError:
            # near-duplicate rows can ill-condition the Gaussian kernel
            corr = corr + np.eye(n) * 1e-10
            jittered = True
            log.warning("correlation matrix factorisation failed; added 1e-10 jitter")
            factor = cho_factor(corr, lower=True, check_finite=False)
        ones = np.ones(n)
        ri_ones = cho_solve(factor, ones, check_finite=False)
        ri_y = cho_solve(factor, y, check_finite=False)
        mu = float((ones @ ri_y) / (ones @ ri_ones))
        resid = y - mu
        alpha = cho_solve(factor, resid, check_finite=False)
        sigma2 = float(resid @ alpha) / n
        return cls(x, y, np.asarray(theta, dtype=float), mu, sigma2, alpha, jittered)

    def predict(self, x_new: np.ndarray) -> np.ndarray:
        """Predicted utility at one or more assignments (deterministic)."""
        q = np.atleast_2d(np.asarray(x_new, dtype=float))
        diff = q[:, None, :] - self.x[None, :, :]
        corr = np.exp(-((diff * diff) @ self.theta))
        return self.mu + corr @ self.alpha


def fit(dataset: EvaluationDataset, rng: np.random.Generator,
        theta0: np.ndarray | None = None, restarts: int = MLE_RESTARTS) -> KrigingModel:
    x, y = dataset.arrays()
    return KrigingModel.fit(x, y, rng, theta0=theta0, restarts=restarts)


def update(dataset: EvaluationDataset, model: KrigingModel, point: EvaluatedPoint,
           rng: np.random.Generator, reoptimize: bool = False) -> KrigingModel:
    """Insert `point` (skipped silently if duplicate) and refit.

    Hyperparameters are kept from the current model unless `reoptimize` is
    set, in which case a warm-started likelihood search is run again.
    """
    if not dataset.add(point):
        return model
    x, y = dataset.arrays()
    if reoptimize:
        return KrigingModel.fit(x, y, rng, theta0=model.theta, restarts=1)
    return KrigingModel._assemble(x, y, model.theta)
