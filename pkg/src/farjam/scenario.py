"""Physical world model: geometry, target kinematics, antenna gain, and JSR.

Everything here is a pure function of its inputs; positions are 2-D metres,
powers are watts, gains are linear (converted from dB at config load),
bandwidths are Hz. The jamming-to-signal ratio deliberately contains no
signal-wavelength term: the wavelength appearing in both the echo-power and
jamming-power link budgets cancels in their ratio.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Sequence

import numpy as np

CONFIG_SCHEMA_VERSION = 1


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class RadarParams:
    """One frequency-agile radar of the network."""

    idx: int
    position: tuple[float, float]
    transmit_power: float        # W
    mainlobe_gain: float         # linear
    working_bandwidth: float     # Hz
    mainlobe_width: float        # rad
    sidelobe_constant: float
    threat_weight: float

    def __post_init__(self) -> None:
        if min(self.transmit_power, self.mainlobe_gain, self.working_bandwidth,
               self.mainlobe_width, self.sidelobe_constant) <= 0:
            raise ValueError(f"radar {self.idx}: powers, gains, bandwidth and "
                             "beam constants must be positive")
        if not 0.0 <= self.threat_weight <= 1.0:
            raise ValueError(f"radar {self.idx}: threat weight outside [0, 1]")


@dataclass(frozen=True)
class UavParams:
    """One jamming UAV (fixed position, single beam)."""

    idx: int
    position: tuple[float, float]
    transmit_power: float        # W
    mainlobe_gain: float         # linear

    def __post_init__(self) -> None:
        if self.transmit_power <= 0 or self.mainlobe_gain <= 0:
            raise ValueError(f"uav {self.idx}: power and gain must be positive")


@dataclass(frozen=True)
class TargetState:
    """Covered high-value target state [x, vx, y, vy] at one frame."""

    frame: int
    state: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "state", np.asarray(self.state, dtype=float))
        if self.state.shape != (4,) or not np.all(np.isfinite(self.state)):
            raise ValueError("target state must be a finite 4-vector [x, vx, y, vy]")

    @property
    def position(self) -> np.ndarray:
        return self.state[[0, 2]]


@dataclass(frozen=True)
class MotionModel:
    """Constant-velocity model: X(k+1) = F @ X(k) + G @ noise."""

    sample_interval: float
    process_noise_std: tuple[float, float]
    transition: np.ndarray
    noise_gain: np.ndarray

    @classmethod
    def from_interval(cls, dt: float, noise_std: tuple[float, float]) -> "MotionModel":
        f = np.array([[1.0, dt, 0.0, 0.0],
                      [0.0, 1.0, 0.0, 0.0],
                      [0.0, 0.0, 1.0, dt],
                      [0.0, 0.0, 0.0, 1.0]])
        g = np.array([[0.5 * dt * dt, 0.0],
                      [dt, 0.0],
                      [0.0, 0.5 * dt * dt],
                      [0.0, dt]])
        return cls(dt, (float(noise_std[0]), float(noise_std[1])), f, g)


@dataclass(frozen=True)
class EnvironmentConstants:
    """Link-budget and QoS constants shared by the whole scenario.

    ``signal_wavelength`` is accepted but never read: it cancels out of the
    jamming-to-signal ratio and is kept only so configs can carry it.
    ``hops_per_frame`` is the number of independent carrier hops a radar gets
    per frame, used only when scoring schedules built from a mis-estimated
    working bandwidth.
    """

    polarization_loss: float
    target_rcs: float
    jsr_requirement: float
    tolerance_factor: float
    cost_factor: float = 0.0
    hops_per_frame: int = 8
    signal_wavelength: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.polarization_loss <= 1.0:
            raise ValueError("polarization loss must lie in (0, 1]")
        if self.target_rcs <= 0 or self.jsr_requirement <= 0 or self.tolerance_factor <= 0:
            raise ValueError("RCS, JSR requirement and tolerance factor must be positive")
        if not 0.0 <= self.cost_factor <= 1.0:
            raise ValueError("cost factor must lie in [0, 1]")
        if self.hops_per_frame < 1:
            raise ValueError("hops_per_frame must be >= 1")


def propagate_target(state: TargetState, model: MotionModel,
                     noise: Sequence[float]) -> TargetState:
    """One CV step with the realised process-noise draw supplied by the caller."""
    nu = np.asarray(noise, dtype=float)
    new = model.transition @ state.state + model.noise_gain @ nu
    return TargetState(state.frame + 1, new)


def distance_target_radar(target: TargetState, radar: RadarParams) -> float:
    return float(np.hypot(target.state[0] - radar.position[0],
                          target.state[2] - radar.position[1]))


def distance_uav_radar(uav: UavParams, radar: RadarParams) -> float:
    return float(np.hypot(uav.position[0] - radar.position[0],
                          uav.position[1] - radar.position[1]))


def radar_gain_toward_uav(radar: RadarParams, theta: float) -> float:
    """Radar antenna gain seen by a jammer `theta` rad off boresight.

    Piecewise beam pattern: full mainlobe gain up to half the mainlobe width
    (boundary owned by the mainlobe branch), an inverse-square sidelobe roll-off
    below pi/2, and a flat backlobe from pi/2 on (boundary owned by the
    backlobe branch).
    """
    if theta < 0:
        raise ValueError("off-boresight angle must be non-negative")
    half = radar.mainlobe_width / 2.0
    if theta <= half:
        return radar.mainlobe_gain
    if theta < math.pi / 2.0:
        return radar.sidelobe_constant * (radar.mainlobe_width / theta) ** 2 * radar.mainlobe_gain
    return radar.sidelobe_constant * (2.0 * radar.mainlobe_width / math.pi) ** 2 * radar.mainlobe_gain


def uav_radar_angle(uav: UavParams, radar: RadarParams, target: TargetState) -> float:
    """Angle at the radar between its boresight (toward the target) and the UAV.

    Returns a value in [0, pi]. Raises on degenerate geometry (UAV or target
    coincident with the radar).
    """
    to_target = target.position - np.asarray(radar.position)
    to_uav = np.asarray(uav.position) - np.asarray(radar.position)
    if not np.any(to_target) or not np.any(to_uav):
        raise ValueError(f"degenerate geometry: radar {radar.idx} coincides with "
                         "the target or the UAV")
    diff = math.atan2(to_uav[1], to_uav[0]) - math.atan2(to_target[1], to_target[0])
    return abs((diff + math.pi) % (2.0 * math.pi) - math.pi)


def jsr(uav: UavParams, radar: RadarParams, target: TargetState,
        env: EnvironmentConstants) -> float:
    """Jamming-to-signal ratio of one UAV against one radar at one frame.

    Ratio of the one-way jamming link budget to the two-way target-echo
    budget; the signal wavelength cancels.
    """
    r_t = distance_target_radar(target, radar)
    r_j = distance_uav_radar(uav, radar)
    if r_t == 0.0 or r_j == 0.0:
        raise ValueError("JSR undefined at zero target or jammer range")
    gain = radar_gain_toward_uav(radar, uav_radar_angle(uav, radar, target))
    num = 4.0 * math.pi * uav.transmit_power * uav.mainlobe_gain * gain \
        * env.polarization_loss * r_t ** 4
    den = radar.transmit_power * radar.mainlobe_gain ** 2 * env.target_rcs * r_j ** 2
    return num / den


@dataclass
class Scenario:
    """Static world description plus the target motion model.

    Frame 1 uses the configured initial target state; later frames are CV
    propagations with process noise drawn once per run so that every
    algorithm under comparison sees the same trajectory.
    """

    radars: list[RadarParams]
    uavs: list[UavParams]
    environment: EnvironmentConstants
    motion: MotionModel
    initial_state: TargetState

    def __post_init__(self) -> None:
        w = np.array([r.threat_weight for r in self.radars])
        if abs(w.sum() - 1.0) > 1e-6:
            raise ValueError(f"threat weights sum to {w.sum():.8f}, expected 1")
        # normalise away the config-file rounding so downstream sums are exact
        if w.sum() != 1.0:
            self.radars = [replace(r, threat_weight=float(wi)) for r, wi in
                           zip(self.radars, w / w.sum())]
        self._uav_pos = np.array([u.position for u in self.uavs])
        self._radar_pos = np.array([r.position for r in self.radars])

    @property
    def n_uavs(self) -> int:
        return len(self.uavs)

    @property
    def n_radars(self) -> int:
        return len(self.radars)

    @property
    def threat_weights(self) -> np.ndarray:
        return np.array([r.threat_weight for r in self.radars])

    @property
    def working_bandwidths(self) -> np.ndarray:
        return np.array([r.working_bandwidth for r in self.radars])

    def jsr_table(self, target: TargetState) -> np.ndarray:
        """(N, M) table of per-pair JSR values at the given target state."""
        out = np.empty((self.n_uavs, self.n_radars))
        for m, radar in enumerate(self.radars):
            for n, uav in enumerate(self.uavs):
                out[n, m] = jsr(uav, radar, target, self.environment)
        return out

    def target_trajectory(self, frames: int, rng: np.random.Generator) -> list[TargetState]:
        """States for frames 1..K; frame 1 is the configured initial state."""
        if frames < 1:
            raise ValueError("need at least one frame")
        sx, sy = self.motion.process_noise_std
        states = [TargetState(1, self.initial_state.state)]
        for _ in range(frames - 1):
            noise = rng.normal(0.0, [sx, sy])
            states.append(propagate_target(states[-1], self.motion, noise))
        return states

    def with_weights(self, weights: Sequence[float]) -> "Scenario":
        if len(weights) != self.n_radars:
            raise ValueError("one weight per radar required")
        radars = [replace(r, threat_weight=float(w)) for r, w in zip(self.radars, weights)]
        return Scenario(radars, self.uavs, self.environment, self.motion, self.initial_state)

    def with_cost_factor(self, cost_factor: float) -> "Scenario":
        env = replace(self.environment, cost_factor=cost_factor)
        return Scenario(self.radars, self.uavs, env, self.motion, self.initial_state)

    def with_bandwidths(self, bandwidths: Sequence[float]) -> "Scenario":
        """Copy with replaced radar working bandwidths (mis-estimation studies)."""
        if len(bandwidths) != self.n_radars:
            raise ValueError("one bandwidth per radar required")
        radars = [replace(r, working_bandwidth=float(b))
                  for r, b in zip(self.radars, bandwidths)]
        return Scenario(radars, self.uavs, self.environment, self.motion, self.initial_state)

    # -- configuration ------------------------------------------------------

    @classmethod
    def from_dict(cls, cfg: dict) -> "Scenario":
        version = cfg.get("schema_version")
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported scenario schema_version {version!r}; "
                             f"this build reads version {CONFIG_SCHEMA_VERSION}")
        radars = [RadarParams(idx=i,
                              position=tuple(r["position_m"]),
                              transmit_power=r["transmit_power_w"],
                              mainlobe_gain=db_to_linear(r["mainlobe_gain_db"]),
                              working_bandwidth=r["working_bandwidth_hz"],
                              mainlobe_width=r["mainlobe_width_rad"],
                              sidelobe_constant=r["sidelobe_constant"],
                              threat_weight=r["threat_weight"])
                  for i, r in enumerate(cfg["radars"])]
        uavs = [UavParams(idx=i,
                          position=tuple(u["position_m"]),
                          transmit_power=u["transmit_power_w"],
                          mainlobe_gain=db_to_linear(u["mainlobe_gain_db"]))
                for i, u in enumerate(cfg["uavs"])]
        e = cfg["environment"]
        env = EnvironmentConstants(polarization_loss=e["polarization_loss"],
                                   target_rcs=e["target_rcs_m2"],
                                   jsr_requirement=e["jsr_requirement"],
                                   tolerance_factor=e["tolerance_factor"],
                                   cost_factor=e.get("cost_factor", 0.0),
                                   hops_per_frame=e.get("hops_per_frame", 8),
                                   signal_wavelength=e.get("signal_wavelength_m"))
        motion = MotionModel.from_interval(cfg["sample_interval_s"],
                                           tuple(cfg["process_noise_std"]))
        initial = TargetState(1, np.asarray(cfg["target_initial_state"], dtype=float))
        return cls(radars, uavs, env, motion, initial)

    @classmethod
    def from_file(cls, path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        def lin_to_db(x: float) -> float:
            return 10.0 * math.log10(x)

        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "sample_interval_s": self.motion.sample_interval,
            "process_noise_std": list(self.motion.process_noise_std),
            "radars": [{"position_m": list(r.position),
                        "transmit_power_w": r.transmit_power,
                        "mainlobe_gain_db": lin_to_db(r.mainlobe_gain),
                        "working_bandwidth_hz": r.working_bandwidth,
                        "mainlobe_width_rad": r.mainlobe_width,
                        "sidelobe_constant": r.sidelobe_constant,
                        "threat_weight": r.threat_weight} for r in self.radars],
            "uavs": [{"position_m": list(u.position),
                      "transmit_power_w": u.transmit_power,
                      "mainlobe_gain_db": lin_to_db(u.mainlobe_gain)} for u in self.uavs],
            "environment": {"polarization_loss": self.environment.polarization_loss,
                            "target_rcs_m2": self.environment.target_rcs,
                            "jsr_requirement": self.environment.jsr_requirement,
                            "tolerance_factor": self.environment.tolerance_factor,
                            "cost_factor": self.environment.cost_factor,
                            "hops_per_frame": self.environment.hops_per_frame},
            "target_initial_state": self.initial_state.state.tolist(),
        }


def _load_config(name: str) -> Scenario:
    text = resources.files("farjam.configs").joinpath(name).read_text(encoding="utf-8")
    return Scenario.from_dict(json.loads(text))


def default_scenario() -> Scenario:
    """The 12-UAV / 3-radar reference scenario shipped with the package."""
    return _load_config("network3x12.json")


def toy_scenario() -> Scenario:
    """3 UAVs vs 2 radars: 27 assignments, small enough to brute-force."""
    return _load_config("toy2x3.json")
