"""Vessel state, the speed/heading adjustment model, and evader behaviours.

Headings are measured from local East, counter-clockwise positive, and kept
in (-pi, pi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .geo import (
    EARTH_RADIUS,
    GeodeticPosition,
    GeometryError,
    distance,
    heading_to,
    wrap_angle,
)

DEFAULT_PURSUER_MAX_SPEED = 15.0
DEFAULT_EVADER_MAX_SPEED = 10.0

# Refuse steps that end this close to a pole; the local frame degenerates there.
POLAR_LIMIT = math.radians(89.5)


class PoleCrossingError(GeometryError):
    pass


@dataclass(frozen=True)
class VesselState:
    id: str
    pos: GeodeticPosition
    speed: float
    heading: float
    max_speed: float = DEFAULT_PURSUER_MAX_SPEED

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"vessel {self.id}: negative speed {self.speed}")
        if self.speed > self.max_speed:
            raise ValueError(f"vessel {self.id}: speed {self.speed} exceeds max_speed {self.max_speed}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class ControlAdjustment:
    u_x: float
    u_y: float


@dataclass(frozen=True)
class PolarAdjustment:
    u_v: float = 0.0
    u_theta: float = 0.0


ZERO_POLAR = PolarAdjustment(0.0, 0.0)


def decompose_control(c: ControlAdjustment) -> PolarAdjustment:
    """Split per-axis adjustments into a speed magnitude and a heading change.

    The heading change uses the single-argument arctangent of ``u_x / u_y``,
    so it always lies in [-pi/2, pi/2].
    """
    ux, uy = float(c.u_x), float(c.u_y)
    u_v = math.hypot(ux, uy)
    if uy == 0.0:
        u_theta = 0.0 if ux == 0.0 else math.copysign(math.pi / 2, ux)
    else:
        u_theta = math.atan(ux / uy)
    return PolarAdjustment(u_v, u_theta)


def great_circle_step(p: GeodeticPosition, heading: float, dist: float) -> GeodeticPosition:
    """Move ``dist`` meters along the great circle leaving ``p`` at ``heading``."""
    if dist < 0:
        raise ValueError("step distance must be non-negative")
    if dist == 0.0:
        return p
    delta = dist / p.radius
    if delta >= math.pi:
        raise ValueError("step longer than half a great circle")
    bearing = math.pi / 2 - heading  # clockwise from north
    sa, ca = math.sin(p.lat), math.cos(p.lat)
    sd, cd = math.sin(delta), math.cos(delta)
    sin_lat2 = sa * cd + ca * sd * math.cos(bearing)
    lat2 = math.asin(max(-1.0, min(1.0, sin_lat2)))
    if abs(lat2) > POLAR_LIMIT:
        raise PoleCrossingError(f"step ends at latitude {math.degrees(lat2):.3f} deg, too close to a pole")
    # the arc can pass over a pole and come back down below the limit
    a, b = sa, ca * math.cos(bearing)
    s_peak = math.atan2(b, a)
    if any(0.0 <= s_peak + k * math.pi <= delta for k in (-1, 0, 1)):
        if math.asin(min(1.0, math.hypot(a, b))) > POLAR_LIMIT:
            raise PoleCrossingError("step passes over a pole")
    dlon = math.atan2(math.sin(bearing) * sd * ca, cd - sa * sin_lat2)
    return GeodeticPosition(p.lon + dlon, lat2, p.radius)


def step_vessel(
    s: VesselState,
    p_now: PolarAdjustment,
    p_prev: PolarAdjustment,
    delta: float,
    dt: float,
) -> VesselState:
    """Apply one speed/heading adjustment and advance the vessel by ``dt``."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if not dt > 0:
        raise ValueError("dt must be positive")
    speed = s.speed + delta * (p_now.u_v - p_prev.u_v)
    speed = min(max(speed, 0.0), s.max_speed)
    heading = wrap_angle(s.heading + p_now.u_theta)
    pos = great_circle_step(s.pos, heading, speed * dt)
    return replace(s, pos=pos, speed=speed, heading=heading)


# ---------------------------------------------------------------------------
# Evader policies


@dataclass(frozen=True)
class ConstantCourse:
    heading: float
    speed: float


@dataclass(frozen=True)
class Waypoints:
    points: tuple
    speed: float

    def __post_init__(self):
        if not self.points:
            raise ValueError("waypoint list must be non-empty")
        object.__setattr__(self, "points", tuple(self.points))


@dataclass(frozen=True)
class RandomManeuver:
    seed: int
    heading: float
    max_turn: float
    speed: float


EvaderPolicy = Union[ConstantCourse, Waypoints, RandomManeuver]


@dataclass
class EvaderMemory:
    """Mutable bookkeeping an evader policy carries between ticks."""

    next_waypoint: int = 0
    offset: float = 0.0
    rng: np.random.Generator | None = field(default=None, repr=False)


def init_memory(policy: EvaderPolicy) -> EvaderMemory:
    if isinstance(policy, RandomManeuver):
        return EvaderMemory(rng=np.random.default_rng(policy.seed))
    return EvaderMemory()


def _policy_speed(s: VesselState, speed: float) -> float:
    if speed < 0:
        raise ValueError("evader speed must be non-negative")
    return min(speed, s.max_speed)


def evader_step(s: VesselState, policy: EvaderPolicy, dt: float, memory: EvaderMemory | None = None) -> VesselState:
    """Advance the evader one tick under ``policy``.

    ``memory`` holds the waypoint cursor and the random stream; passing the
    same memory object across ticks keeps the trajectory deterministic.
    """
    if memory is None:
        memory = init_memory(policy)
    if isinstance(policy, ConstantCourse):
        speed = _policy_speed(s, policy.speed)
        heading = wrap_angle(policy.heading)
        return replace(s, pos=great_circle_step(s.pos, heading, speed * dt), speed=speed, heading=heading)

    if isinstance(policy, Waypoints):
        speed = _policy_speed(s, policy.speed)
        pos, heading = s.pos, s.heading
        budget = speed * dt
        pts: Sequence[GeodeticPosition] = policy.points
        while memory.next_waypoint < len(pts) and budget > 0:
            wp = pts[memory.next_waypoint]
            remaining = distance(pos, wp)
            if remaining <= budget:
                # arrive, spend the leftover on the next leg
                budget -= remaining
                if remaining > 0:
                    heading = heading_to(pos, wp)
                pos = wp
                memory.next_waypoint += 1
            else:
                heading = heading_to(pos, wp)
                pos = great_circle_step(pos, heading, budget)
                budget = 0.0
        moved_speed = speed if memory.next_waypoint < len(pts) else 0.0
        return replace(s, pos=pos, speed=moved_speed, heading=wrap_angle(heading))

    if isinstance(policy, RandomManeuver):
        if memory.rng is None:
            memory.rng = np.random.default_rng(policy.seed)
        speed = _policy_speed(s, policy.speed)
        memory.offset += float(memory.rng.uniform(-policy.max_turn, policy.max_turn))
        heading = wrap_angle(policy.heading + memory.offset)
        return replace(s, pos=great_circle_step(s.pos, heading, speed * dt), speed=speed, heading=heading)

    raise TypeError(f"unknown evader policy {policy!r}")


__all__ = [
    "EARTH_RADIUS",
    "ConstantCourse",
    "ControlAdjustment",
    "EvaderMemory",
    "EvaderPolicy",
    "PoleCrossingError",
    "PolarAdjustment",
    "RandomManeuver",
    "VesselState",
    "Waypoints",
    "ZERO_POLAR",
    "decompose_control",
    "evader_step",
    "great_circle_step",
    "init_memory",
    "step_vessel",
]
