"""Scenario files: TOML in, ``ScenarioConfig`` out, and back again.

Angles are degrees and distances meters at the file boundary. See
``docs/scenario-format.md`` for the full grammar.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .engine import (
    ConfigError,
    Malfunction,
    PursuerSpec,
    ScenarioConfig,
    ScheduledEvent,
    SetMission,
)
from .geo import GeodeticPosition, GeometryError
from .kinematics import (
    DEFAULT_EVADER_MAX_SPEED,
    DEFAULT_PURSUER_MAX_SPEED,
    ConstantCourse,
    RandomManeuver,
    VesselState,
    Waypoints,
)
from .pursuit import Idle, Intercept, Surveil, mission_name
from .rl import CostParams, LearnerConfig, LearnerError

LEARNING_DEFAULTS = {
    "delta": 0.99,
    "q_scale": 1e-4,
    "r": 0.01,
    "alpha_a": 0.01,
    "alpha_c": 1e-6,
    "conv_threshold": 1e-8,
    "window_l": 20,
    "max_iters": 6000,
    "init_scale": 0.1,
    "normalize": True,
    "literal_error": False,
}
SIMULATION_DEFAULTS = {
    "seed": 0,
    "dt_s": 10.0,
    "max_duration_s": 6 * 3600.0,
    "capture_radius_m": 500.0,
}


class ScenarioParseError(ConfigError):
    """TOML syntax error; ``field`` carries the line/column location."""


# ---------------------------------------------------------------------------
# Field readers


def _section(doc: dict, name: str, required: bool = True) -> dict:
    if name not in doc:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    sec = doc[name]
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a table")
    return sec


def _unknown(sec: dict, where: str, allowed):
    extra = sorted(set(sec) - set(allowed))
    if extra:
        raise ConfigError(f"{where}.{extra[0]}", "unknown field")


def _num(sec: dict, key: str, where: str, default=None, kind=float):
    if key not in sec:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing required field")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {type(v).__name__}")
    if kind is int:
        if isinstance(v, float):
            if not v.is_integer():
                raise ConfigError(f"{where}.{key}", "expected an integer")
            v = int(v)
        return v
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}.{key}", "must be finite")
    return v


def _str(sec: dict, key: str, where: str, default=None) -> str:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing required field")
        return default
    v = sec[key]
    if not isinstance(v, str):
        raise ConfigError(f"{where}.{key}", "expected a string")
    return v


def _bool(sec: dict, key: str, where: str, default: bool) -> bool:
    v = sec.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{where}.{key}", "expected true or false")
    return v


def _position(sec: dict, where: str) -> GeodeticPosition:
    lon = _num(sec, "lon_deg", where)
    lat = _num(sec, "lat_deg", where)
    if not -90.0 <= lat <= 90.0:
        raise ConfigError(f"{where}.lat_deg", "must lie in [-90, 90]")
    try:
        return GeodeticPosition.from_degrees(lon, lat)
    except GeometryError as exc:
        raise ConfigError(f"{where}.lat_deg", str(exc)) from exc


def _vessel(sec: dict, where: str, vid: str, max_default: float) -> VesselState:
    pos = _position(sec, where)
    speed = _num(sec, "speed_mps", where, 0.0)
    vmax = _num(sec, "max_speed_mps", where, max_default)
    if not vmax > 0:
        raise ConfigError(f"{where}.max_speed_mps", "must be positive")
    if not 0 <= speed <= vmax:
        raise ConfigError(f"{where}.speed_mps", "must lie in [0, max_speed_mps]")
    heading = math.radians(_num(sec, "heading_deg", where, 0.0))
    return VesselState(vid, pos, speed, heading, vmax)


def _mission(sec: dict, where: str, key: str = "mission"):
    name = _str(sec, key, where)
    if name == "intercept":
        return Intercept()
    if name == "idle":
        return Idle()
    if name == "surveil":
        standoff = _num(sec, "standoff_m", where)
        if not standoff > 0:
            raise ConfigError(f"{where}.standoff_m", "must be positive")
        return Surveil(standoff)
    raise ConfigError(f"{where}.{key}", f"unknown mission {name!r} (intercept, surveil, idle)")


def _policy(sec: dict, state: VesselState):
    where = "evader"
    kind = _str(sec, "policy", where, "constant")
    speed = state.speed
    if speed > state.max_speed:
        raise ConfigError(f"{where}.speed_mps", "exceeds max_speed_mps")
    if kind == "constant":
        return ConstantCourse(state.heading, speed)
    if kind == "waypoints":
        pts = sec.get("waypoints")
        if not isinstance(pts, list) or not pts:
            raise ConfigError(f"{where}.waypoints", "expected a non-empty list of [lon_deg, lat_deg] pairs")
        out = []
        for i, p in enumerate(pts):
            if not (isinstance(p, list) and len(p) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in p)):
                raise ConfigError(f"{where}.waypoints[{i}]", "expected [lon_deg, lat_deg]")
            if not -90 <= p[1] <= 90:
                raise ConfigError(f"{where}.waypoints[{i}]", "latitude outside [-90, 90]")
            out.append(GeodeticPosition.from_degrees(float(p[0]), float(p[1])))
        return Waypoints(tuple(out), speed)
    if kind == "random":
        seed = _num(sec, "policy_seed", where, 0, kind=int)
        turn = _num(sec, "max_turn_deg", where, 5.0)
        if turn < 0:
            raise ConfigError(f"{where}.max_turn_deg", "must be non-negative")
        return RandomManeuver(seed, state.heading, math.radians(turn), speed)
    raise ConfigError(f"{where}.policy", f"unknown policy {kind!r} (constant, waypoints, random)")


def _learning(sec: dict, seed: int) -> tuple[LearnerConfig, CostParams, float]:
    where = "learning"
    _unknown(sec, where, LEARNING_DEFAULTS)
    d = LEARNING_DEFAULTS
    vals = {
        k: _num(sec, k, where, d[k], kind=int if k in ("window_l", "max_iters") else float)
        for k in d
        if k not in ("normalize", "literal_error")
    }
    checks = [
        ("alpha_a", 0 < vals["alpha_a"] < 1, "must lie in (0, 1)"),
        ("alpha_c", 0 < vals["alpha_c"] < 1, "must lie in (0, 1)"),
        ("conv_threshold", vals["conv_threshold"] > 0, "must be positive"),
        ("window_l", vals["window_l"] >= 1, "must be at least 1"),
        ("max_iters", vals["max_iters"] >= 1, "must be at least 1"),
        ("init_scale", vals["init_scale"] > 0, "must be positive"),
        ("q_scale", vals["q_scale"] > 0, "must be positive"),
        ("r", vals["r"] > 0, "must be positive"),
        ("delta", 0 < vals["delta"] <= 1, "must lie in (0, 1]"),
    ]
    for key, ok, reason in checks:
        if not ok:
            raise ConfigError(f"{where}.{key}", reason)
    try:
        lc = LearnerConfig(
            alpha_a=vals["alpha_a"],
            alpha_c=vals["alpha_c"],
            Delta=vals["conv_threshold"],
            L=vals["window_l"],
            N_t=vals["max_iters"],
            init_scale=vals["init_scale"],
            rng_seed=seed,
            normalize=_bool(sec, "normalize", where, d["normalize"]),
            literal=_bool(sec, "literal_error", where, d["literal_error"]),
        )
        cost = CostParams.scaled(vals["q_scale"], vals["r"])
    except LearnerError as exc:
        raise ConfigError(where, str(exc)) from exc
    return lc, cost, vals["delta"]


def config_from_dict(doc: dict) -> ScenarioConfig:
    _unknown(doc, "document", ("simulation", "learning", "evader", "pursuers", "events"))
    sim = _section(doc, "simulation", required=False)
    _unknown(sim, "simulation", list(SIMULATION_DEFAULTS) + ["name"])
    seed = _num(sim, "seed", "simulation", SIMULATION_DEFAULTS["seed"], kind=int)
    dt = _num(sim, "dt_s", "simulation", SIMULATION_DEFAULTS["dt_s"])
    if not dt > 0:
        raise ConfigError("simulation.dt_s", "must be positive")
    horizon = _num(sim, "max_duration_s", "simulation", SIMULATION_DEFAULTS["max_duration_s"])
    radius = _num(sim, "capture_radius_m", "simulation", SIMULATION_DEFAULTS["capture_radius_m"])
    name = _str(sim, "name", "simulation", "")

    learner, cost, delta = _learning(_section(doc, "learning", required=False), seed)

    ev = _section(doc, "evader")
    _unknown(ev, "evader", ("id", "lon_deg", "lat_deg", "speed_mps", "heading_deg", "max_speed_mps",
                            "policy", "waypoints", "policy_seed", "max_turn_deg"))
    evader = _vessel(ev, "evader", _str(ev, "id", "evader", "evader"), DEFAULT_EVADER_MAX_SPEED)
    policy = _policy(ev, evader)

    raw = doc.get("pursuers")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("pursuers", "at least one [[pursuers]] entry is required")
    pursuers = []
    for i, p in enumerate(raw):
        where = f"pursuers[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(where, "must be a table")
        _unknown(p, where, ("id", "lon_deg", "lat_deg", "speed_mps", "heading_deg", "max_speed_mps",
                            "mission", "standoff_m"))
        vid = _str(p, "id", where)
        state = _vessel(p, where, vid, DEFAULT_PURSUER_MAX_SPEED)
        pursuers.append(PursuerSpec(state, _mission(p, where)))

    events = []
    for i, e in enumerate(doc.get("events", [])):
        where = f"events[{i}]"
        if not isinstance(e, dict):
            raise ConfigError(where, "must be a table")
        _unknown(e, where, ("time_s", "kind", "vessel", "mission", "standoff_m"))
        t = _num(e, "time_s", where)
        kind = _str(e, "kind", where)
        vessel = _str(e, "vessel", where)
        if kind == "malfunction":
            events.append(ScheduledEvent(t, Malfunction(vessel)))
        elif kind == "set_mission":
            events.append(ScheduledEvent(t, SetMission(vessel, _mission(e, where))))
        else:
            raise ConfigError(f"{where}.kind", f"unknown event kind {kind!r} (malfunction, set_mission)")

    try:
        return ScenarioConfig(
            seed=seed,
            evader=evader,
            evader_policy=policy,
            pursuers=tuple(pursuers),
            events=tuple(events),
            dt=dt,
            max_duration=horizon,
            capture_radius=radius,
            learner=learner,
            cost=cost,
            delta=delta,
            name=name,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("document", str(exc)) from exc


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioParseError("syntax", str(exc)) from exc
    return config_from_dict(doc)


def load_scenario(path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Echo


def _deg(x: float) -> float:
    """Degrees that convert back to exactly ``x`` radians when possible."""
    d = math.degrees(x)
    if math.radians(d) == x:
        return d
    lo = hi = d
    for _ in range(8):
        lo, hi = math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf)
        for cand in (lo, hi):
            if math.radians(cand) == x:
                return cand
    return d


def _vessel_dict(s: VesselState) -> dict:
    return {
        "id": s.id,
        "lon_deg": _deg(s.pos.lon),
        "lat_deg": _deg(s.pos.lat),
        "speed_mps": s.speed,
        "heading_deg": _deg(s.heading),
        "max_speed_mps": s.max_speed,
    }


def _mission_fields(m, key: str = "mission") -> dict:
    out: dict[str, Any] = {key: mission_name(m)}
    if isinstance(m, Surveil):
        out["standoff_m"] = m.standoff
    return out


def config_to_dict(cfg: ScenarioConfig) -> dict:
    lc = cfg.learner
    q = float(cfg.cost.Q[0, 0])
    doc: dict[str, Any] = {
        "simulation": {
            "name": cfg.name,
            "seed": cfg.seed,
            "dt_s": cfg.dt,
            "max_duration_s": cfg.max_duration,
            "capture_radius_m": cfg.capture_radius,
        },
        "learning": {
            "delta": cfg.delta,
            "q_scale": q,
            "r": cfg.cost.R,
            "alpha_a": lc.alpha_a,
            "alpha_c": lc.alpha_c,
            "conv_threshold": lc.Delta,
            "window_l": lc.L,
            "max_iters": lc.N_t,
            "init_scale": lc.init_scale,
            "normalize": lc.normalize,
            "literal_error": lc.literal,
        },
    }
    ev = _vessel_dict(cfg.evader)
    pol = cfg.evader_policy
    if isinstance(pol, ConstantCourse):
        ev["policy"] = "constant"
    elif isinstance(pol, Waypoints):
        ev["policy"] = "waypoints"
        ev["waypoints"] = [[_deg(p.lon), _deg(p.lat)] for p in pol.points]
    elif isinstance(pol, RandomManeuver):
        ev["policy"] = "random"
        ev["policy_seed"] = pol.seed
        ev["max_turn_deg"] = _deg(pol.max_turn)
    doc["evader"] = ev
    doc["pursuers"] = [_vessel_dict(p.state) | _mission_fields(p.mission) for p in cfg.pursuers]
    events = []
    for e in cfg.events:
        if isinstance(e.kind, Malfunction):
            events.append({"time_s": e.time, "kind": "malfunction", "vessel": e.kind.vessel})
        else:
            events.append({"time_s": e.time, "kind": "set_mission", "vessel": e.kind.vessel}
                          | _mission_fields(e.kind.mission))
    if events:
        doc["events"] = events
    return doc


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Serialize ``cfg``; ``parse_scenario(dump_scenario(cfg)) == cfg``."""
    return tomli_w.dumps(config_to_dict(cfg))


__all__ = [
    "LEARNING_DEFAULTS",
    "SIMULATION_DEFAULTS",
    "ScenarioParseError",
    "config_from_dict",
    "config_to_dict",
    "dump_scenario",
    "load_scenario",
    "parse_scenario",
]
