import math
from dataclasses import replace

import numpy as np
import pytest

from farjam.scenario import (EnvironmentConstants, MotionModel, RadarParams, Scenario,
                             TargetState, UavParams, default_scenario,
                             distance_target_radar, distance_uav_radar, jsr,
                             propagate_target, radar_gain_toward_uav, toy_scenario,
                             uav_radar_angle)


@pytest.fixture(scope="module")
def world():
    return default_scenario()


def state(x, vx, y, vy, frame=1):
    return TargetState(frame, np.array([x, vx, y, vy], dtype=float))


class TestPropagation:
    def test_zero_noise_cv_step(self, world):
        nxt = propagate_target(world.initial_state, world.motion, (0.0, 0.0))
        assert np.array_equal(nxt.state, [67800.0, -240.0, 57800.0, -240.0])
        assert nxt.frame == 2

    def test_zero_state_fixed_point(self, world):
        nxt = propagate_target(state(0, 0, 0, 0), world.motion, (0.0, 0.0))
        assert np.array_equal(nxt.state, np.zeros(4))

    def test_noise_gain_columns(self, world):
        nxt = propagate_target(state(0, 0, 0, 0), world.motion, (1.0, 0.0))
        assert np.array_equal(nxt.state, [12.5, 5.0, 0.0, 0.0])

    def test_linearity_in_state(self, world):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x1, x2 = rng.normal(0, 1e4, 4), rng.normal(0, 1e4, 4)
            a, b = rng.normal(size=2)
            lhs = propagate_target(state(*(a * x1 + b * x2)), world.motion, (0, 0)).state
            rhs = (a * propagate_target(state(*x1), world.motion, (0, 0)).state
                   + b * propagate_target(state(*x2), world.motion, (0, 0)).state)
            assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)

    def test_transition_matches_interval(self):
        m = MotionModel.from_interval(2.5, (1.0, 1.0))
        assert m.transition[0, 1] == 2.5
        assert m.noise_gain[0, 0] == 0.5 * 2.5 ** 2


class TestDistances:
    def test_coincident_target(self, world):
        assert distance_target_radar(state(0, 0, 15000, 0), world.radars[0]) == 0.0

    def test_table_geometry(self, world):
        # sqrt(69000^2 + 44000^2) against radar 1 at (0, 15 km)
        d = distance_target_radar(world.initial_state, world.radars[0])
        assert d == pytest.approx(81835.20025025906, abs=1e-6)

    def test_pythagorean_triple(self, world):
        radar = replace(world.radars[2], position=(0.0, 0.0))
        assert distance_target_radar(state(3000, 0, 4000, 0), radar) == pytest.approx(5000.0)
        uav = replace(world.uavs[0], position=(3000.0, 4000.0))
        assert distance_uav_radar(uav, radar) == pytest.approx(5000.0)

    def test_uav10_to_radar1(self, world):
        # sqrt(6000^2 + 4000^2): UAV 10 sits at (6, 19) km
        d = distance_uav_radar(world.uavs[9], world.radars[0])
        assert d == pytest.approx(7211.102550927979, abs=1e-6)

    def test_coincident_uav(self, world):
        uav = replace(world.uavs[0], position=world.radars[0].position)
        assert distance_uav_radar(uav, world.radars[0]) == 0.0


class TestGainPattern:
    def test_boresight_full_gain(self, world):
        assert radar_gain_toward_uav(world.radars[0], 0.0) == 10_000.0

    def test_backlobe_value(self, world):
        expected = 0.313 * (2.0 / math.pi) ** 2 * 1e4
        assert radar_gain_toward_uav(world.radars[0], math.pi) == pytest.approx(expected)
        assert expected == pytest.approx(1268.5, abs=0.1)

    def test_sidelobe_at_mainlobe_width(self, world):
        assert radar_gain_toward_uav(world.radars[0], 1.0) == pytest.approx(3130.0)

    def test_boundary_ownership(self, world):
        radar = world.radars[0]
        # theta = width/2 belongs to the mainlobe branch
        assert radar_gain_toward_uav(radar, 0.5) == radar.mainlobe_gain
        # theta = pi/2 belongs to the flat backlobe branch
        back = radar_gain_toward_uav(radar, math.pi / 2)
        assert back == radar_gain_toward_uav(radar, 3.0)

    def test_rejects_negative_angle(self, world):
        with pytest.raises(ValueError):
            radar_gain_toward_uav(world.radars[0], -0.1)

    def test_monotone_then_flat(self, world):
        radar = world.radars[0]
        # with the shipped sidelobe constant the pattern jumps *up* just past
        # the mainlobe edge (0.313 * 2^2 > 1); it decreases from there on
        assert radar_gain_toward_uav(radar, 0.5 + 1e-12) > radar.mainlobe_gain
        thetas = np.linspace(0.5 + 1e-9, math.pi / 2 - 1e-9, 200)
        gains = [radar_gain_toward_uav(radar, t) for t in thetas]
        assert all(a >= b for a, b in zip(gains, gains[1:]))
        flat = {radar_gain_toward_uav(radar, t) for t in np.linspace(math.pi / 2, math.pi, 50)}
        assert len(flat) == 1


class TestAngle:
    def test_collinear_is_zero(self, world):
        radar = replace(world.radars[0], position=(0.0, 0.0))
        uav = replace(world.uavs[0], position=(1000.0, 1000.0))
        assert uav_radar_angle(uav, radar, state(5000, 0, 5000, 0)) == pytest.approx(0.0)

    def test_uav10_near_boresight(self, world):
        theta = uav_radar_angle(world.uavs[9], world.radars[0], world.initial_state)
        assert theta == pytest.approx(0.020336179175687752, abs=1e-9)
        assert theta < world.radars[0].mainlobe_width / 2  # mainlobe regime

    def test_opposed_bearings(self, world):
        radar = replace(world.radars[0], position=(0.0, 0.0))
        uav = replace(world.uavs[0], position=(-2000.0, 0.0))
        assert uav_radar_angle(uav, radar, state(7000, 0, 0, 0)) == pytest.approx(math.pi)

    def test_degenerate_geometry(self, world):
        radar = world.radars[0]
        uav = replace(world.uavs[0], position=radar.position)
        with pytest.raises(ValueError):
            uav_radar_angle(uav, radar, world.initial_state)
        with pytest.raises(ValueError):
            uav_radar_angle(world.uavs[0], radar, state(0, 0, 15000, 0))


class TestJsr:
    def test_uav10_radar1_frame1(self, world):
        value = jsr(world.uavs[9], world.radars[0], world.initial_state, world.environment)
        assert value == pytest.approx(6854.836710993791, rel=1e-12)

    def test_power_law_in_distances(self, world):
        env = world.environment
        radar = replace(world.radars[2], position=(0.0, 0.0))
        uav = replace(world.uavs[0], position=(0.0, 10000.0))
        base = jsr(uav, radar, state(0, 0, 50000, 0), env)
        assert jsr(uav, radar, state(0, 0, 100000, 0), env) == pytest.approx(16 * base)
        farther = replace(uav, position=(0.0, 20000.0))
        assert jsr(farther, radar, state(0, 0, 50000, 0), env) == pytest.approx(base / 4)

    def test_zero_power_zero_jsr(self, world):
        uav = replace(world.uavs[9], transmit_power=1e-300)
        assert jsr(uav, world.radars[0], world.initial_state,
                   world.environment) == pytest.approx(0.0, abs=1e-280)

    def test_scaling_invariance(self, world):
        scaled_uav = replace(world.uavs[9], transmit_power=7.0 * world.uavs[9].transmit_power)
        scaled_radar = replace(world.radars[0],
                               transmit_power=7.0 * world.radars[0].transmit_power)
        assert jsr(scaled_uav, scaled_radar, world.initial_state,
                   world.environment) == pytest.approx(
            jsr(world.uavs[9], world.radars[0], world.initial_state, world.environment),
            rel=1e-12)

    def test_wavelength_field_is_inert(self, world):
        env_a = replace(world.environment, signal_wavelength=0.03)
        env_b = replace(world.environment, signal_wavelength=3.0)
        assert jsr(world.uavs[9], world.radars[0], world.initial_state, env_a) == \
            jsr(world.uavs[9], world.radars[0], world.initial_state, env_b)

    def test_zero_distance_rejected(self, world):
        uav = replace(world.uavs[0], position=world.radars[0].position)
        with pytest.raises(ValueError):
            jsr(uav, world.radars[0], world.initial_state, world.environment)


class TestScenarioConfig:
    def test_weights_sum_enforced(self, world):
        with pytest.raises(ValueError):
            Scenario(
                [replace(r, threat_weight=0.5) for r in world.radars],
                world.uavs, world.environment, world.motion, world.initial_state)

    def test_db_conversion(self, world):
        assert world.radars[0].mainlobe_gain == pytest.approx(1e4)
        assert world.uavs[0].mainlobe_gain == pytest.approx(10 ** 0.5)

    def test_roundtrip_through_dict(self, world):
        again = Scenario.from_dict(world.to_dict())
        assert np.allclose(again.jsr_table(again.initial_state),
                           world.jsr_table(world.initial_state), rtol=1e-12)

    def test_schema_version_checked(self, world):
        bad = world.to_dict()
        bad["schema_version"] = 99
        with pytest.raises(ValueError, match="schema_version"):
            Scenario.from_dict(bad)

    def test_trajectory_shared_shape(self, world):
        rng = np.random.default_rng(5)
        traj = world.target_trajectory(10, rng)
        assert len(traj) == 10
        assert traj[0].frame == 1
        assert np.array_equal(traj[0].state, world.initial_state.state)

    def test_toy_scenario_dimensions(self):
        toy = toy_scenario()
        assert (toy.n_uavs, toy.n_radars) == (3, 2)

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            RadarParams(0, (0, 0), -1.0, 1e4, 5e8, 1.0, 0.313, 0.5)
        with pytest.raises(ValueError):
            UavParams(0, (0, 0), 1.0, 0.0)
        with pytest.raises(ValueError):
            EnvironmentConstants(0.0, 25.0, 1e-5, 1.0)
        with pytest.raises(ValueError):
            EnvironmentConstants(0.5, 25.0, 1e-5, 1.0, cost_factor=1.5)
