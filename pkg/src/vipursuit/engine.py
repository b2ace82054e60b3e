"""Deterministic fixed-step world stepper.

One tick: apply due events, move the evader, let every active pursuer decide,
move the pursuers, test for captures, record a snapshot. Tick ``k`` is
stamped ``k * dt``; tick 0 records the initial state.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Union

import numpy as np

from .geo import GeodeticPosition, GeometryError, distance
from .kinematics import (
    ConstantCourse,
    EvaderPolicy,
    RandomManeuver,
    VesselState,
    Waypoints,
    evader_step,
    init_memory,
    step_vessel,
)
from .pursuit import (
    Idle,
    Intercept,
    Mission,
    PursuerController,
    Surveil,
    check_capture,
    controller_step,
    measure_error,
    mission_name,
    mission_target,
)
from .rl import CostParams, LearnerConfig


class ConfigError(ValueError):
    """Invalid scenario; ``field`` names the offending entry."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class SimulationError(RuntimeError):
    def __init__(self, tick: int, reason: str):
        super().__init__(f"tick {tick}: {reason}")
        self.tick = tick


@dataclass(frozen=True)
class Malfunction:
    vessel: str


@dataclass(frozen=True)
class SetMission:
    vessel: str
    mission: Mission


@dataclass(frozen=True)
class ScheduledEvent:
    time: float
    kind: Union[Malfunction, SetMission]


@dataclass(frozen=True)
class PursuerSpec:
    state: VesselState
    mission: Mission


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    evader: VesselState
    evader_policy: EvaderPolicy
    pursuers: tuple
    events: tuple = ()
    dt: float = 10.0
    max_duration: float = 6 * 3600.0
    capture_radius: float = 500.0
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    cost: CostParams = field(default_factory=lambda: CostParams.scaled(1e-4, 0.01))
    delta: float = 0.99
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pursuers", tuple(self.pursuers))
        object.__setattr__(self, "events", tuple(self.events))
        self.validate()

    def validate(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("simulation.dt_s", "must be positive")
        if not self.max_duration >= self.dt:
            raise ConfigError("simulation.max_duration_s", "must be at least dt_s")
        if not self.capture_radius > 0:
            raise ConfigError("simulation.capture_radius_m", "must be positive")
        if not 0 < self.delta <= 1:
            raise ConfigError("learning.delta", "must lie in (0, 1]")
        if not self.pursuers:
            raise ConfigError("pursuers", "at least one pursuer is required")
        ids = [self.evader.id] + [p.state.id for p in self.pursuers]
        seen = set()
        for i, vid in enumerate(ids):
            if vid in seen:
                where = "evader.id" if i == 0 else f"pursuers[{i - 1}].id"
                raise ConfigError(where, f"duplicate vessel id {vid!r}")
            seen.add(vid)
        pursuer_ids = set(ids[1:])
        for i, ev in enumerate(self.events):
            if not 0 <= ev.time <= self.max_duration:
                raise ConfigError(f"events[{i}].time_s", "must lie within [0, max_duration_s]")
            if ev.kind.vessel not in pursuer_ids:
                raise ConfigError(f"events[{i}].vessel", f"unknown pursuer {ev.kind.vessel!r}")

    @property
    def vessel_ids(self) -> list[str]:
        return [self.evader.id] + [p.state.id for p in self.pursuers]


@dataclass(frozen=True)
class Snapshot:
    time: float
    vessel_id: str
    lon: float
    lat: float
    speed: float
    heading: float
    ex: float = 0.0
    ey: float = 0.0
    e_theta: float = 0.0
    u_x: float = 0.0
    u_y: float = 0.0
    u_v: float = 0.0
    u_theta: float = 0.0
    captured: bool = False
    critic_converged: bool = False
    actor_converged: bool = False


@dataclass(frozen=True)
class TimelineEntry:
    time: float
    vessel: str
    event: str
    mission: str
    applied: bool = True


@dataclass
class RunRecord:
    config: ScenarioConfig
    snapshots: list = field(default_factory=list)
    timeline: list = field(default_factory=list)
    capture_ticks: dict = field(default_factory=dict)
    ticks: int = 0

    def rows(self, vessel_id: str) -> list[Snapshot]:
        return [s for s in self.snapshots if s.vessel_id == vessel_id]


# ---------------------------------------------------------------------------


@dataclass
class World:
    cfg: ScenarioConfig
    evader: VesselState
    states: dict
    controllers: dict
    disabled: set = field(default_factory=set)
    tick: int = 0

    @classmethod
    def initial(cls, cfg: ScenarioConfig) -> "World":
        states = {p.state.id: p.state for p in cfg.pursuers}
        ctrls = {
            p.state.id: PursuerController.create(p.state.id, p.mission, cfg.learner, cfg.cost, cfg.seed)
            for p in cfg.pursuers
        }
        return cls(cfg, cfg.evader, states, ctrls)


def apply_event(world: World, e: ScheduledEvent) -> tuple[World, TimelineEntry]:
    vid = e.kind.vessel
    if vid not in world.controllers:
        raise ConfigError("events.vessel", f"unknown pursuer {vid!r}")
    c = world.controllers[vid]
    if isinstance(e.kind, Malfunction):
        c.mission = Idle()
        c.learner_x.freeze()
        c.learner_y.freeze()
        c.halt()
        world.disabled.add(vid)
        world.states[vid] = replace(world.states[vid], speed=0.0)
        return world, TimelineEntry(e.time, vid, "malfunction", "idle")
    if isinstance(e.kind, SetMission):
        name = mission_name(e.kind.mission)
        if vid in world.disabled:
            return world, TimelineEntry(e.time, vid, "set_mission", name, applied=False)
        c.mission = e.kind.mission
        c.reprime()
        if isinstance(c.mission, Idle):
            c.halt()
            world.states[vid] = replace(world.states[vid], speed=0.0)
        return world, TimelineEntry(e.time, vid, "set_mission", name)
    raise TypeError(f"unknown event {e.kind!r}")


def _evader_row(t: float, s: VesselState) -> Snapshot:
    return Snapshot(t, s.id, s.pos.lon_deg, s.pos.lat_deg, s.speed, math.degrees(s.heading))


def _pursuer_row(t: float, s: VesselState, c: PursuerController, err, polar) -> Snapshot:
    return Snapshot(
        t, s.id, s.pos.lon_deg, s.pos.lat_deg, s.speed, math.degrees(s.heading),
        err.ex, err.ey, err.e_theta,
        c.last_control.u_x, c.last_control.u_y, polar.u_v, polar.u_theta,
        c.captured,
        c.learner_x.critic_converged and c.learner_y.critic_converged,
        c.learner_x.actor_converged and c.learner_y.actor_converged,
    )


def _all_intercepts_done(world: World) -> bool:
    active = [c for c in world.controllers.values() if isinstance(c.mission, Intercept) or c.captured]
    return bool(active) and all(c.captured for c in active)


def run(config: ScenarioConfig) -> RunRecord:
    """Simulate ``config`` to completion. Identical configs give identical records."""
    cfg = config
    world = World.initial(cfg)
    memory = init_memory(cfg.evader_policy)
    rec = RunRecord(cfg)
    pending = sorted(enumerate(cfg.events), key=lambda ie: (ie[1].time, ie[0]))
    pending = [e for _, e in pending]
    n_max = int(math.floor(cfg.max_duration / cfg.dt + 1e-9))

    def apply_due(t):
        while pending and pending[0].time <= t + 1e-9:
            _, entry = apply_event(world, pending.pop(0))
            rec.timeline.append(entry)

    def capture_checks(k):
        for pid, c in world.controllers.items():
            if c.captured or not isinstance(c.mission, Intercept):
                continue
            if check_capture(world.states[pid], world.evader, cfg.capture_radius):
                c.captured = True
                rec.capture_ticks[pid] = k

    # tick 0: initial state
    apply_due(0.0)
    capture_checks(0)
    rec.snapshots.append(_evader_row(0.0, world.evader))
    for pid, c in world.controllers.items():
        s = world.states[pid]
        point, hdg = mission_target(c.mission, world.evader, s)
        err = measure_error(s, point, hdg)
        c.last_error = err
        rec.snapshots.append(_pursuer_row(0.0, s, c, err, c.prev_polar))

    k = 0
    while k < n_max and not _all_intercepts_done(world):
        k += 1
        t = k * cfg.dt
        try:
            apply_due(t)
            world.evader = evader_step(world.evader, cfg.evader_policy, cfg.dt, memory)
            polars = {}
            for pid, c in world.controllers.items():
                s = world.states[pid]
                if pid in world.disabled or (isinstance(c.mission, Idle) and not c.captured):
                    controller_step(c, world.evader, s, cfg.learner, cfg.dt, cfg.delta)
                    polars[pid] = None
                    continue
                p_prev = c.prev_polar
                _, p_now = controller_step(c, world.evader, s, cfg.learner, cfg.dt, cfg.delta)
                polars[pid] = p_now
                world.states[pid] = step_vessel(s, p_now, p_prev, cfg.delta, cfg.dt)
        except GeometryError as exc:
            raise SimulationError(k, str(exc)) from exc
        capture_checks(k)
        rec.snapshots.append(_evader_row(t, world.evader))
        for pid, c in world.controllers.items():
            p = polars[pid] if polars[pid] is not None else c.prev_polar
            rec.snapshots.append(_pursuer_row(t, world.states[pid], c, c.last_error, p))

    rec.ticks = k + 1
    for e in pending:
        name = mission_name(e.kind.mission) if isinstance(e.kind, SetMission) else "idle"
        kind = "set_mission" if isinstance(e.kind, SetMission) else "malfunction"
        rec.timeline.append(TimelineEntry(e.time, e.kind.vessel, kind, name, applied=False))
    return rec


def metrics(record: RunRecord) -> dict:
    """Per-pursuer capture time and closest approach, plus capture order."""
    cfg = record.config
    ev_rows = record.rows(cfg.evader.id)
    per = {}
    for p in cfg.pursuers:
        pid = p.state.id
        rows = record.rows(pid)
        dmin = math.inf
        for a, b in zip(rows, ev_rows):
            d = distance(_pos(a), _pos(b))
            dmin = min(dmin, d)
        tick = record.capture_ticks.get(pid)
        per[pid] = {
            "capture_time_s": None if tick is None else tick * cfg.dt,
            "min_distance_m": None if not rows else dmin,
        }
    order = sorted(record.capture_ticks, key=lambda pid: (record.capture_ticks[pid], _index(cfg, pid)))
    return {
        "pursuers": per,
        "capture_order": order,
        "timeline": [asdict(e) for e in record.timeline],
        "ticks": record.ticks,
        "end_time_s": (record.ticks - 1) * cfg.dt if record.ticks else 0.0,
    }


def _index(cfg: ScenarioConfig, pid: str) -> int:
    return [p.state.id for p in cfg.pursuers].index(pid)


def _pos(row: Snapshot) -> GeodeticPosition:
    return GeodeticPosition.from_degrees(row.lon, row.lat)


def separation_series(record: RunRecord, pursuer_id: str) -> np.ndarray:
    """Pursuer-evader great-circle distance at every recorded tick."""
    ev_rows = record.rows(record.config.evader.id)
    rows = record.rows(pursuer_id)
    return np.array([distance(_pos(a), _pos(b)) for a, b in zip(rows, ev_rows)])


__all__ = [
    "ConfigError",
    "ConstantCourse",
    "Malfunction",
    "PursuerSpec",
    "RandomManeuver",
    "RunRecord",
    "ScenarioConfig",
    "ScheduledEvent",
    "SetMission",
    "SimulationError",
    "Snapshot",
    "Surveil",
    "TimelineEntry",
    "Waypoints",
    "World",
    "apply_event",
    "metrics",
    "run",
    "separation_series",
]
