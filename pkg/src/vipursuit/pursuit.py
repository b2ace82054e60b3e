"""Per-pursuer decision making: error windows, the two axis learners, missions.

Each pursuer measures its offset from a mission-dependent target point in its
own East-North-Up frame and runs one learner per horizontal axis. The two
learner outputs form a velocity-adjustment vector in that frame; its
components across and along the current heading are what the speed/heading
decomposition consumes.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .geo import GeodeticPosition, distance, heading_to, relative_enu, wrap_angle
from .kinematics import (
    ControlAdjustment,
    PolarAdjustment,
    VesselState,
    ZERO_POLAR,
    decompose_control,
    great_circle_step,
)
from .rl import CostParams, Learner, LearnerConfig, run_learner_step

WINDOW = 3


@dataclass(frozen=True)
class Intercept:
    pass


@dataclass(frozen=True)
class Surveil:
    standoff: float

    def __post_init__(self):
        if not self.standoff > 0:
            raise ValueError("standoff must be positive")


@dataclass(frozen=True)
class Idle:
    pass


Mission = Union[Intercept, Surveil, Idle]


def mission_name(m: Mission) -> str:
    return {Intercept: "intercept", Surveil: "surveil", Idle: "idle"}[type(m)]


@dataclass(frozen=True)
class TrackingError:
    ex: float
    ey: float
    e_theta: float


def measure_error(pursuer: VesselState, target_point: GeodeticPosition, target_heading: float) -> TrackingError:
    """Pursuer-minus-target offset in the pursuer's East/North axes."""
    d = -relative_enu(pursuer.pos, target_point)
    return TrackingError(float(d[0]), float(d[1]), wrap_angle(pursuer.heading - target_heading))


def standoff_point(evader: VesselState, pursuer: VesselState, standoff: float) -> GeodeticPosition:
    if distance(evader.pos, pursuer.pos) == 0.0:
        bearing = evader.heading + math.pi
    else:
        bearing = heading_to(evader.pos, pursuer.pos)
    return great_circle_step(evader.pos, bearing, standoff)


def mission_target(mission: Mission, evader: VesselState, pursuer: VesselState) -> tuple[GeodeticPosition, float]:
    if isinstance(mission, Intercept):
        return evader.pos, evader.heading
    if isinstance(mission, Surveil):
        return standoff_point(evader, pursuer, mission.standoff), evader.heading
    if isinstance(mission, Idle):
        return pursuer.pos, pursuer.heading
    raise TypeError(f"unknown mission {mission!r}")


def check_capture(pursuer: VesselState, evader: VesselState, radius: float) -> bool:
    if not radius > 0:
        raise ValueError("capture radius must be positive")
    return distance(pursuer.pos, evader.pos) <= radius


def to_heading_frame(u_east: float, u_north: float, heading: float) -> ControlAdjustment:
    """Express an East/North vector as (port, forward) components.

    ``u_x`` is the component to port and ``u_y`` the one along the heading,
    so ``atan(u_x / u_y)`` is the turn that lines the bow up with the vector.
    """
    s, c = math.sin(heading), math.cos(heading)
    return ControlAdjustment(-u_east * s + u_north * c, u_east * c + u_north * s)


def learner_seed(scenario_seed: int, vessel_id: str) -> list[int]:
    return [int(scenario_seed), zlib.crc32(vessel_id.encode("utf-8"))]


@dataclass
class PursuerController:
    vessel_id: str
    mission: Mission
    learner_x: Learner
    learner_y: Learner
    window_x: np.ndarray | None = None
    window_y: np.ndarray | None = None
    prev_u: np.ndarray = field(default_factory=lambda: np.zeros(2))
    prev_polar: PolarAdjustment = ZERO_POLAR
    captured: bool = False
    last_error: TrackingError = TrackingError(0.0, 0.0, 0.0)
    last_control: ControlAdjustment = ControlAdjustment(0.0, 0.0)

    @classmethod
    def create(cls, vessel_id: str, mission: Mission, cfg: LearnerConfig, cost: CostParams, scenario_seed: int):
        # both axes draw from the same stream so the East and North gains agree
        seed = learner_seed(scenario_seed, vessel_id)
        lx = Learner.create(cfg, cost, seed=seed)
        ly = Learner.create(cfg, cost, seed=seed)
        return cls(vessel_id, mission, lx, ly)

    def reprime(self):
        """Drop the windows so the next measurement refills them."""
        self.window_x = None
        self.window_y = None

    def halt(self):
        self.prev_u = np.zeros(2)
        self.prev_polar = ZERO_POLAR
        self.last_control = ControlAdjustment(0.0, 0.0)


def controller_step(
    c: PursuerController,
    evader: VesselState,
    self_state: VesselState,
    cfg: LearnerConfig | None,
    dt: float,
    delta: float = 1.0,
) -> tuple[PursuerController, PolarAdjustment]:
    """Measure, learn, and return this tick's speed/heading adjustment.

    The speed magnitude is capped at ``max_speed / delta``, the largest value
    that can still move the vessel inside its speed envelope.
    """
    if c.captured or isinstance(c.mission, Idle):
        c.last_error = TrackingError(0.0, 0.0, 0.0) if isinstance(c.mission, Idle) else c.last_error
        c.halt()
        return c, ZERO_POLAR
    point, heading = mission_target(c.mission, evader, self_state)
    err = measure_error(self_state, point, heading)
    c.last_error = err

    if c.window_x is None:
        c.window_x = np.full(WINDOW, err.ex)
        c.window_y = np.full(WINDOW, err.ey)
        u = np.array([c.learner_x.control(c.window_x), c.learner_y.control(c.window_y)])
    else:
        old_x, old_y = c.window_x, c.window_y
        c.window_x = np.concatenate(([err.ex], old_x[:-1]))
        c.window_y = np.concatenate(([err.ey], old_y[:-1]))
        _, ux = run_learner_step(c.learner_x, (old_x, c.prev_u[0], c.window_x), cfg)
        _, uy = run_learner_step(c.learner_y, (old_y, c.prev_u[1], c.window_y), cfg)
        u = np.array([ux, uy])
    c.prev_u = u

    ctl = to_heading_frame(u[0], u[1], self_state.heading)
    polar = decompose_control(ctl)
    cap = self_state.max_speed / delta
    if polar.u_v > cap:
        polar = PolarAdjustment(cap, polar.u_theta)
    c.last_control = ctl
    c.prev_polar = polar
    return c, polar


__all__ = [
    "Idle",
    "Intercept",
    "Mission",
    "PursuerController",
    "Surveil",
    "TrackingError",
    "check_capture",
    "controller_step",
    "measure_error",
    "mission_name",
    "mission_target",
    "standoff_point",
    "to_heading_frame",
]
