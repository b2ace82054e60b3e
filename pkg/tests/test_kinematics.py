import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vipursuit.geo import EARTH_RADIUS, GeodeticPosition, central_angle, distance
from vipursuit.kinematics import (
    ConstantCourse,
    ControlAdjustment,
    PolarAdjustment,
    PoleCrossingError,
    RandomManeuver,
    VesselState,
    Waypoints,
    ZERO_POLAR,
    decompose_control,
    evader_step,
    great_circle_step,
    init_memory,
    step_vessel,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def vessel(lon=0.0, lat=0.0, speed=5.0, heading=0.0, vmax=15.0):
    return VesselState("v", GeodeticPosition.from_degrees(lon, lat), speed, heading, vmax)


def test_decompose_examples():
    assert decompose_control(ControlAdjustment(0, 1)) == PolarAdjustment(1, 0)
    p = decompose_control(ControlAdjustment(1, 1))
    assert p.u_v == pytest.approx(math.sqrt(2))
    assert p.u_theta == pytest.approx(math.pi / 4)
    assert decompose_control(ControlAdjustment(1, 0)) == PolarAdjustment(1, math.pi / 2)
    assert decompose_control(ControlAdjustment(-2, 0)) == PolarAdjustment(2, -math.pi / 2)
    assert decompose_control(ControlAdjustment(0, 0)) == PolarAdjustment(0, 0)


@given(finite, finite)
def test_decompose_properties(ux, uy):
    p = decompose_control(ControlAdjustment(ux, uy))
    assert p.u_v >= 0
    assert -math.pi / 2 <= p.u_theta <= math.pi / 2
    assert p.u_v ** 2 == pytest.approx(ux * ux + uy * uy, rel=1e-12, abs=1e-300)


def test_step_vessel_examples():
    s = vessel(speed=5.0)
    assert step_vessel(s, PolarAdjustment(2, 0), PolarAdjustment(2, 0), 0.99, 10).speed == 5.0
    assert step_vessel(s, PolarAdjustment(3, 0), PolarAdjustment(1, 0), 0.99, 10).speed == pytest.approx(6.98)
    assert step_vessel(s, PolarAdjustment(0, math.pi / 4), ZERO_POLAR, 0.99, 10).heading == pytest.approx(math.pi / 4)


def test_step_vessel_clamps():
    s = vessel(speed=14.0)
    assert step_vessel(s, PolarAdjustment(10, 0), ZERO_POLAR, 1.0, 1).speed == 15.0
    assert step_vessel(s, ZERO_POLAR, PolarAdjustment(30, 0), 1.0, 1).speed == 0.0


def test_step_vessel_rejects_bad_params():
    with pytest.raises(ValueError):
        step_vessel(vessel(), ZERO_POLAR, ZERO_POLAR, 0.0, 10)
    with pytest.raises(ValueError):
        step_vessel(vessel(), ZERO_POLAR, ZERO_POLAR, 0.5, 0)


@given(st.floats(-60, 60), st.floats(-179, 179), st.floats(0, 15), st.floats(-math.pi, math.pi), st.floats(0.1, 100))
def test_zero_adjustment_moves_speed_dt(lat, lon, speed, heading, dt):
    s = vessel(lon, lat, speed, heading)
    n = step_vessel(s, ZERO_POLAR, ZERO_POLAR, 0.99, dt)
    assert n.speed == s.speed
    assert n.heading == s.heading
    assert distance(s.pos, n.pos) == pytest.approx(speed * dt, rel=1e-6, abs=1e-6)


def test_great_circle_examples():
    p = GeodeticPosition(0, 0)
    assert great_circle_step(p, 1.0, 0.0) is p
    q = great_circle_step(p, 0.0, 1e5)
    assert q.lon == pytest.approx(1e5 / EARTH_RADIUS, rel=1e-12)
    assert q.lat == pytest.approx(0.0, abs=1e-15)


@given(st.floats(-60, 60), st.floats(-180, 180), st.floats(-math.pi, math.pi), st.floats(0, 5e6))
def test_great_circle_distance(lat, lon, heading, d):
    p = GeodeticPosition.from_degrees(lon, lat)
    try:
        q = great_circle_step(p, heading, d)
    except PoleCrossingError:
        return
    assert central_angle(p, q) == pytest.approx(d / EARTH_RADIUS, rel=1e-9, abs=1e-12)
    assert q.radius == p.radius


@given(st.floats(-50, 50), st.floats(-180, 180), st.floats(-math.pi, math.pi), st.floats(1.0, 2e6), st.floats(0, 2e6))
def test_great_circle_additivity(lat, lon, heading, d1, d2):
    from vipursuit.geo import heading_to

    p = GeodeticPosition.from_degrees(lon, lat)
    try:
        direct = great_circle_step(p, heading, d1 + d2)
        mid = great_circle_step(p, heading, d1)
    except PoleCrossingError:
        return
    # continue along the same great circle: the heading that points away from p
    back = heading_to(mid, p)
    two = great_circle_step(mid, back + math.pi, d2)
    assert distance(direct, two) <= 1e-6 * (d1 + d2) + 1e-6


def test_pole_crossing_refused():
    p = GeodeticPosition.from_degrees(0, 89.0)
    with pytest.raises(PoleCrossingError):
        great_circle_step(p, math.pi / 2, 300e3)
    with pytest.raises(ValueError):
        great_circle_step(p, 0.0, -1.0)


def test_vessel_state_validation():
    with pytest.raises(ValueError):
        vessel(speed=-1)
    with pytest.raises(ValueError):
        vessel(speed=20)
    assert vessel(heading=3 * math.pi / 2).heading == pytest.approx(-math.pi / 2)


def test_constant_course_holds():
    s = vessel(speed=8.0, heading=math.pi / 4, vmax=10)
    pol = ConstantCourse(math.pi / 4, 8.0)
    for _ in range(50):
        s = evader_step(s, pol, 10.0)
        assert s.heading == math.pi / 4
        assert s.speed == 8.0


def test_waypoints_arrival_and_hold():
    s = vessel(speed=5.0, vmax=10)
    wp = GeodeticPosition.from_degrees(0.01, 0.0)
    pol = Waypoints((wp,), 10.0)
    mem = init_memory(pol)
    for _ in range(200):
        s = evader_step(s, pol, 10.0, mem)
    assert s.pos == wp
    assert s.speed == 0.0
    before = s.pos
    s = evader_step(s, pol, 10.0, mem)
    assert s.pos == before


def test_waypoints_already_at_last():
    s = vessel()
    pol = Waypoints((s.pos,), 5.0)
    assert evader_step(s, pol, 10.0).pos == s.pos
    with pytest.raises(ValueError):
        Waypoints((), 1.0)


def test_random_maneuver_deterministic():
    pol = RandomManeuver(7, 0.3, math.radians(10), 6.0)

    def traj():
        s = vessel(speed=6.0, vmax=10)
        mem = init_memory(pol)
        out = []
        for _ in range(100):
            s = evader_step(s, pol, 10.0, mem)
            out.append((s.pos.lon, s.pos.lat, s.heading))
        return out

    a, b = traj(), traj()
    assert a == b
    heads = np.array([h for *_, h in a])
    assert np.all(np.abs(np.diff(np.unwrap(heads))) <= math.radians(10) + 1e-12)
