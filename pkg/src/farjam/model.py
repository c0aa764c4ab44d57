"""Task-assignment and bandwidth-allocation value types, coalitions, feasibility.

Assignments are stored as a length-N vector of task indices in {0..M}, task 0
meaning "idle"; the equivalent Boolean N x (M+1) matrix is derived on demand.
A row of all zeros in a supplied matrix is the same schedule as an explicit
idle flag, so matrices are canonicalised to one-hot rows on ingestion.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .scenario import RadarParams

#: relative tolerance on the per-radar bandwidth-sum equality
FEASIBILITY_RTOL = 1e-6


@dataclass(frozen=True)
class TaskAssignment:
    """Which radar (1..M) each UAV jams, or 0 for idle, at one frame."""

    tasks: tuple[int, ...]
    n_radars: int
    frame: int = 1

    def __post_init__(self) -> None:
        if any(t < 0 or t > self.n_radars for t in self.tasks):
            raise ValueError(f"task indices must lie in 0..{self.n_radars}")

    @classmethod
    def from_tasks(cls, tasks: Sequence[int], n_radars: int, frame: int = 1) -> "TaskAssignment":
        return cls(tuple(int(t) for t in tasks), n_radars, frame)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, frame: int = 1) -> "TaskAssignment":
        """Canonicalise a Boolean N x (M+1) matrix (all-zero row == idle)."""
        u = np.asarray(matrix)
        if u.ndim != 2 or u.shape[1] < 2:
            raise ValueError("assignment matrix must be N x (M+1)")
        if not np.isin(u, (0, 1)).all():
            raise ValueError("assignment matrix entries must be 0 or 1")
        if (u.sum(axis=1) > 1).any():
            raise ValueError("each UAV selects at most one task")
        tasks = np.where(u.sum(axis=1) == 0, 0, u.argmax(axis=1))
        return cls(tuple(int(t) for t in tasks), u.shape[1] - 1, frame)

    @property
    def n_uavs(self) -> int:
        return len(self.tasks)

    @property
    def matrix(self) -> np.ndarray:
        u = np.zeros((self.n_uavs, self.n_radars + 1), dtype=int)
        u[np.arange(self.n_uavs), list(self.tasks)] = 1
        return u

    def as_array(self) -> np.ndarray:
        return np.array(self.tasks, dtype=int)

    def working_uavs(self) -> list[int]:
        return [n for n, t in enumerate(self.tasks) if t > 0]


@dataclass
class BandwidthAllocation:
    """Per-UAV, per-task allocated jamming bandwidth in Hz. Column 0 stays 0."""

    grid: np.ndarray
    frame: int = 1

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 2 or self.grid.shape[1] < 2:
            raise ValueError("bandwidth grid must be N x (M+1)")
        if np.any(self.grid[:, 0] != 0.0):
            raise ValueError("column 0 (idle) must hold no bandwidth")

    @classmethod
    def zeros(cls, n_uavs: int, n_radars: int, frame: int = 1) -> "BandwidthAllocation":
        return cls(np.zeros((n_uavs, n_radars + 1)), frame)

    @property
    def n_uavs(self) -> int:
        return self.grid.shape[0]

    @property
    def n_radars(self) -> int:
        return self.grid.shape[1] - 1


@dataclass(frozen=True)
class Coalition:
    """UAVs (0-based indices) jamming one radar (1-based task id)."""

    radar: int
    members: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)


def coalitions_of(assignment: TaskAssignment) -> list[Coalition]:
    """Split the working UAVs into one (possibly empty) coalition per radar."""
    return [Coalition(m, tuple(n for n, t in enumerate(assignment.tasks) if t == m))
            for m in range(1, assignment.n_radars + 1)]


@dataclass(frozen=True)
class RadarFeasibility:
    radar: int
    coalition_size: int
    sum_error: float
    box_violation: float
    feasible: bool


@dataclass(frozen=True)
class FeasibilityReport:
    per_radar: tuple[RadarFeasibility, ...]
    feasible: bool


def validate_bandwidth(assignment: TaskAssignment, allocation: BandwidthAllocation,
                       radars: Sequence[RadarParams],
                       rtol: float = FEASIBILITY_RTOL) -> FeasibilityReport:
    """Check the per-radar cover equality and box constraints of a schedule.

    Radars with an empty coalition have nothing to satisfy and are reported
    with zero errors.
    """
    if allocation.grid.shape != (assignment.n_uavs, assignment.n_radars + 1):
        raise ValueError("assignment and allocation shapes disagree")
    if allocation.frame != assignment.frame:
        raise ValueError("assignment and allocation frames disagree")
    rows = []
    for coalition in coalitions_of(assignment):
        radar = radars[coalition.radar - 1]
        tol = rtol * radar.working_bandwidth
        if not coalition.members:
            rows.append(RadarFeasibility(coalition.radar, 0, 0.0, 0.0, True))
            continue
        bands = allocation.grid[list(coalition.members), coalition.radar]
        sum_error = abs(bands.sum() - radar.working_bandwidth)
        box = float(np.maximum(0.0, -bands).sum()
                    + np.maximum(0.0, bands - radar.working_bandwidth).sum())
        rows.append(RadarFeasibility(coalition.radar, len(coalition), float(sum_error),
                                     box, sum_error <= tol and box <= tol))
    return FeasibilityReport(tuple(rows), all(r.feasible for r in rows))


def dump_schedule_rows(assignment: TaskAssignment,
                       allocation: BandwidthAllocation) -> list[dict]:
    """Canonical per-UAV rows of one frame's schedule (`uav` is 1-based)."""
    return [{"frame": assignment.frame,
             "uav": n + 1,
             "task": int(task),
             "bandwidth_hz": float(allocation.grid[n, task]) if task > 0 else 0.0}
            for n, task in enumerate(assignment.tasks)]


def write_schedule_csv(path, frames: Iterable[tuple[TaskAssignment, BandwidthAllocation]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["frame", "uav", "task", "bandwidth_hz"])
        writer.writeheader()
        for assignment, allocation in frames:
            writer.writerows(dump_schedule_rows(assignment, allocation))
