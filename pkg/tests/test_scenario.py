import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vipursuit.cli import BUNDLED, bundled_text
from vipursuit.engine import ConfigError, Malfunction, SetMission
from vipursuit.geo import distance
from vipursuit.kinematics import RandomManeuver, Waypoints
from vipursuit.pursuit import Intercept, Surveil
from vipursuit.scenario import ScenarioParseError, dump_scenario, parse_scenario

MINIMAL = """
[evader]
lon_deg = -45.0
lat_deg = 44.0
speed_mps = 8.0
heading_deg = 45.0

[[pursuers]]
id = "P1"
lon_deg = -46.0
lat_deg = 43.5
mission = "intercept"
"""


def test_minimal_document_gets_defaults():
    cfg = parse_scenario(MINIMAL)
    lc = cfg.learner
    assert cfg.delta == 0.99
    assert np.array_equal(cfg.cost.Q, 1e-4 * np.eye(3)) and cfg.cost.R == 0.01
    assert (lc.alpha_a, lc.alpha_c, lc.Delta, lc.L, lc.N_t) == (0.01, 1e-6, 1e-8, 20, 6000)
    assert lc.init_scale == 0.1
    assert (cfg.dt, cfg.max_duration, cfg.capture_radius) == (10.0, 21600.0, 500.0)
    assert cfg.pursuers[0].state.max_speed == 15.0 and cfg.evader.max_speed == 10.0
    assert isinstance(cfg.pursuers[0].mission, Intercept)


@pytest.mark.parametrize(
    "patch, field",
    [
        ("[simulation]\ndt_s = -1.0\n", "simulation.dt_s"),
        ("[simulation]\ncapture_radius_m = 0\n", "simulation.capture_radius_m"),
        ("[learning]\nalpha_a = 2.0\n", "learning.alpha_a"),
        ("[learning]\nwindow_l = 0\n", "learning.window_l"),
        ("[learning]\nbogus = 1\n", "learning.bogus"),
        ("[learning]\nnormalize = 1\n", "learning.normalize"),
    ],
)
def test_field_tagged_errors(patch, field):
    with pytest.raises(ConfigError) as info:
        parse_scenario(MINIMAL + "\n" + patch)
    assert info.value.field == field


def test_pursuer_errors():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_scenario(MINIMAL + '\n[[pursuers]]\nid = "P1"\nlon_deg = 0.0\nlat_deg = 0.0\nmission = "intercept"\n')
    with pytest.raises(ConfigError) as info:
        parse_scenario(MINIMAL.replace('"intercept"', '"surveil"'))
    assert info.value.field == "pursuers[0].standoff_m"
    with pytest.raises(ConfigError) as info:
        parse_scenario(MINIMAL.replace("lat_deg = 43.5", "lat_deg = 95.0"))
    assert info.value.field == "pursuers[0].lat_deg"
    with pytest.raises(ConfigError) as info:
        parse_scenario(MINIMAL.replace('mission = "intercept"', 'mission = "intercept"\nspeed_mps = 99.0'))
    assert info.value.field == "pursuers[0].speed_mps"
    with pytest.raises(ConfigError, match="pursuers"):
        parse_scenario(MINIMAL.split("[[pursuers]]")[0])


def test_event_errors():
    doc = MINIMAL + '\n[[events]]\ntime_s = 10.0\nkind = "explode"\nvessel = "P1"\n'
    with pytest.raises(ConfigError) as info:
        parse_scenario(doc)
    assert info.value.field == "events[0].kind"
    doc = MINIMAL + '\n[[events]]\ntime_s = 10.0\nkind = "malfunction"\nvessel = "nobody"\n'
    with pytest.raises(ConfigError) as info:
        parse_scenario(doc)
    assert info.value.field == "events[0].vessel"


def test_syntax_error_is_located():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario("[evader\nlon_deg = 1")
    assert "line 1" in str(info.value)


def test_events_and_policies_parse():
    doc = MINIMAL.replace(
        "heading_deg = 45.0", 'heading_deg = 45.0\npolicy = "waypoints"\nwaypoints = [[-44.0, 45.0], [-43.0, 45.5]]'
    ) + (
        '\n[[events]]\ntime_s = 60.0\nkind = "set_mission"\nvessel = "P1"\nmission = "surveil"\nstandoff_m = 1000.0\n'
        '\n[[events]]\ntime_s = 120.0\nkind = "malfunction"\nvessel = "P1"\n'
    )
    cfg = parse_scenario(doc)
    assert isinstance(cfg.evader_policy, Waypoints) and len(cfg.evader_policy.points) == 2
    assert cfg.events[0].kind == SetMission("P1", Surveil(1000.0))
    assert cfg.events[1].kind == Malfunction("P1")
    rnd = parse_scenario(MINIMAL.replace("heading_deg = 45.0", 'heading_deg = 45.0\npolicy = "random"\npolicy_seed = 3'))
    assert isinstance(rnd.evader_policy, RandomManeuver) and rnd.evader_policy.seed == 3


@pytest.mark.parametrize("name", BUNDLED)
def test_echo_is_fixed_point_on_bundled(name):
    cfg = parse_scenario(bundled_text(name))
    assert parse_scenario(dump_scenario(cfg)) == cfg
    assert dump_scenario(parse_scenario(dump_scenario(cfg))) == dump_scenario(cfg)


angles = st.floats(-179.9, 179.9, allow_nan=False)


@given(angles, st.floats(-80, 80), st.floats(0, 10), angles, st.floats(0.1, 1e4), st.integers(0, 2**31))
def test_echo_fixed_point_random(lon, lat, speed, heading, standoff, seed):
    doc = f"""
[simulation]
seed = {seed}
[evader]
lon_deg = {lon!r}
lat_deg = {lat!r}
speed_mps = {speed!r}
heading_deg = {heading!r}
[[pursuers]]
id = "A"
lon_deg = {lat!r}
lat_deg = {lat / 2!r}
heading_deg = {-heading!r}
mission = "surveil"
standoff_m = {standoff!r}
"""
    cfg = parse_scenario(doc)
    assert parse_scenario(dump_scenario(cfg)) == cfg


EXPECTED_KM = {
    "scenario1.toml": (556, 367, 289),
    "scenario2.toml": (744, 378, 289),
    "scenario3.toml": (744, 378, 289),
}


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_distances(name):
    cfg = parse_scenario(bundled_text(name))
    got = [distance(p.state.pos, cfg.evader.pos) / 1000 for p in cfg.pursuers]
    assert np.allclose(got, EXPECTED_KM[name], atol=1.0)
