import numpy as np
import pytest

from farjam.model import (BandwidthAllocation, TaskAssignment, coalitions_of,
                          dump_schedule_rows, validate_bandwidth, write_schedule_csv)
from farjam.scenario import default_scenario


@pytest.fixture(scope="module")
def world():
    return default_scenario()


class TestTaskAssignment:
    def test_matrix_roundtrip(self):
        a = TaskAssignment.from_tasks([0, 1, 3, 2], 3)
        m = a.matrix
        assert m.shape == (4, 4)
        assert m.sum() == 4 and (m.sum(axis=1) == 1).all()
        assert TaskAssignment.from_matrix(m).tasks == a.tasks

    def test_all_zero_row_canonicalised_to_idle(self):
        m = np.zeros((3, 3), dtype=int)
        m[1, 2] = 1
        a = TaskAssignment.from_matrix(m)
        assert a.tasks == (0, 2, 0)
        assert (a.matrix.sum(axis=1) == 1).all()

    def test_rejects_multi_task_rows(self):
        m = np.zeros((2, 3), dtype=int)
        m[0, 1] = m[0, 2] = 1
        with pytest.raises(ValueError):
            TaskAssignment.from_matrix(m)

    def test_rejects_non_boolean(self):
        with pytest.raises(ValueError):
            TaskAssignment.from_matrix(np.full((2, 3), 2))
        with pytest.raises(ValueError):
            TaskAssignment.from_tasks([0, 4], 3)


class TestCoalitions:
    def test_all_idle(self):
        a = TaskAssignment.from_tasks([0] * 12, 3)
        assert all(len(c) == 0 for c in coalitions_of(a))

    def test_everyone_on_radar_one(self):
        a = TaskAssignment.from_tasks([1] * 12, 3)
        cs = coalitions_of(a)
        assert cs[0].members == tuple(range(12))
        assert cs[1].members == () and cs[2].members == ()

    def test_single_member_pattern(self):
        # UAV 10 (index 9) jamming radar 1, everyone else idle
        tasks = [0] * 12
        tasks[9] = 1
        cs = coalitions_of(TaskAssignment.from_tasks(tasks, 3))
        assert cs[0].members == (9,)

    def test_partition_property(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            tasks = rng.integers(0, 4, 12)
            a = TaskAssignment.from_tasks(tasks, 3)
            cs = coalitions_of(a)
            sizes = sum(len(c) for c in cs)
            idle = sum(1 for t in tasks if t == 0)
            assert sizes + idle == 12
            seen = [m for c in cs for m in c.members]
            assert len(seen) == len(set(seen))


class TestValidateBandwidth:
    def test_single_member_full_band(self, world):
        a = TaskAssignment.from_tasks([1] + [0] * 11, 3)
        b = BandwidthAllocation.zeros(12, 3)
        b.grid[0, 1] = 500e6
        assert validate_bandwidth(a, b, world.radars).feasible

    def test_even_split(self, world):
        a = TaskAssignment.from_tasks([1, 1] + [0] * 10, 3)
        b = BandwidthAllocation.zeros(12, 3)
        b.grid[0, 1] = b.grid[1, 1] = 250e6
        assert validate_bandwidth(a, b, world.radars).feasible

    def test_box_violation(self, world):
        a = TaskAssignment.from_tasks([1] + [0] * 11, 3)
        b = BandwidthAllocation.zeros(12, 3)
        b.grid[0, 1] = 600e6
        report = validate_bandwidth(a, b, world.radars)
        assert not report.feasible
        assert report.per_radar[0].box_violation == pytest.approx(100e6)

    def test_sum_tolerance(self, world):
        a = TaskAssignment.from_tasks([1] + [0] * 11, 3)
        b = BandwidthAllocation.zeros(12, 3)
        b.grid[0, 1] = 500e6 + 400.0       # inside the 1e-6-relative band
        assert validate_bandwidth(a, b, world.radars).feasible
        b.grid[0, 1] = 500e6 + 600.0       # outside it
        assert not validate_bandwidth(a, b, world.radars).feasible

    def test_empty_coalitions_have_nothing_to_satisfy(self, world):
        a = TaskAssignment.from_tasks([0] * 12, 3)
        b = BandwidthAllocation.zeros(12, 3)
        assert validate_bandwidth(a, b, world.radars).feasible

    def test_shape_mismatch(self, world):
        a = TaskAssignment.from_tasks([0] * 12, 3)
        with pytest.raises(ValueError):
            validate_bandwidth(a, BandwidthAllocation.zeros(11, 3), world.radars)


class TestSerialisation:
    def test_idle_column_must_stay_zero(self):
        grid = np.zeros((2, 3))
        grid[0, 0] = 1.0
        with pytest.raises(ValueError):
            BandwidthAllocation(grid)

    def test_dump_rows(self):
        a = TaskAssignment.from_tasks([0, 2], 2, frame=4)
        b = BandwidthAllocation.zeros(2, 2, frame=4)
        b.grid[1, 2] = 1e8
        rows = dump_schedule_rows(a, b)
        assert rows == [
            {"frame": 4, "uav": 1, "task": 0, "bandwidth_hz": 0.0},
            {"frame": 4, "uav": 2, "task": 2, "bandwidth_hz": 1e8},
        ]

    def test_csv_roundtrip(self, tmp_path):
        a = TaskAssignment.from_tasks([1, 0, 2], 2, frame=1)
        b = BandwidthAllocation.zeros(3, 2, frame=1)
        b.grid[0, 1] = 2.5e8
        b.grid[2, 2] = 5e8
        path = tmp_path / "schedule.csv"
        write_schedule_csv(path, [(a, b)])
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "frame,uav,task,bandwidth_hz"
        assert len(lines) == 4
        assert lines[1].split(",") == ["1", "1", "1", "250000000.0"]
