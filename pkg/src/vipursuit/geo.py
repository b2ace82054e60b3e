"""Spherical-Earth conversions between geodetic, ECEF and local ENU frames.

Angles are radians. Longitude is ``lon`` (measured east of the prime
meridian), latitude is ``lat``. Vectors are plain ``numpy`` arrays of
shape ``(3,)``; batch helpers accept ``(n, 3)`` arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit, select

EARTH_RADIUS = 6_371_000.0


class GeometryError(ValueError):
    """Raised for positions outside the supported domain (poles, bad radius)."""


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w == -math.pi:
        return math.pi
    return w


@dataclass(frozen=True)
class GeodeticPosition:
    lon: float
    lat: float
    radius: float = EARTH_RADIUS

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise GeometryError("non-finite geodetic coordinates")
        if abs(self.lat) > math.pi / 2:
            raise GeometryError(f"latitude {self.lat!r} outside [-pi/2, pi/2]")
        if not self.radius > 0:
            raise GeometryError(f"radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "lon", wrap_angle(self.lon))

    @classmethod
    def from_degrees(cls, lon_deg: float, lat_deg: float, radius: float = EARTH_RADIUS):
        return cls(math.radians(lon_deg), math.radians(lat_deg), radius)

    @property
    def lon_deg(self) -> float:
        return math.degrees(self.lon)

    @property
    def lat_deg(self) -> float:
        return math.degrees(self.lat)


def geodetic_to_ecef(p: GeodeticPosition) -> np.ndarray:
    cl = math.cos(p.lat)
    return p.radius * np.array([cl * math.cos(p.lon), cl * math.sin(p.lon), math.sin(p.lat)])


def ecef_to_geodetic(v: np.ndarray) -> GeodeticPosition:
    x, y, z = (float(c) for c in v)
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise GeometryError("cannot place the Earth's center on the sphere")
    return GeodeticPosition(math.atan2(y, x), math.asin(max(-1.0, min(1.0, z / r))), r)


def enu_rotation(p: GeodeticPosition) -> np.ndarray:
    """Rotation taking ECEF components to (East, North, Up) at ``p``."""
    so, co = math.sin(p.lon), math.cos(p.lon)
    sa, ca = math.sin(p.lat), math.cos(p.lat)
    return np.array(
        [
            [-so, co, 0.0],
            [-co * sa, -so * sa, ca],
            [co * ca, so * ca, sa],
        ]
    )


def ecef_to_enu(v: np.ndarray, origin: GeodeticPosition) -> np.ndarray:
    """Rotate an ECEF displacement into the ENU frame at ``origin``.

    Absolute positions must be differenced against the frame origin first.
    """
    return enu_rotation(origin) @ np.asarray(v, dtype=float)


def enu_to_ecef(v: np.ndarray, origin: GeodeticPosition) -> np.ndarray:
    return enu_rotation(origin).T @ np.asarray(v, dtype=float)


def relative_enu(a: GeodeticPosition, b: GeodeticPosition) -> np.ndarray:
    """Position of ``b`` seen from ``a``, in ``a``'s ENU frame."""
    return ecef_to_enu(geodetic_to_ecef(b) - geodetic_to_ecef(a), a)


def central_angle(a: GeodeticPosition, b: GeodeticPosition) -> float:
    """Great-circle angle between two positions (haversine, stable near 0)."""
    dlat = b.lat - a.lat
    dlon = b.lon - a.lon
    h = math.sin(dlat / 2) ** 2 + math.cos(a.lat) * math.cos(b.lat) * math.sin(dlon / 2) ** 2
    return 2.0 * math.asin(min(1.0, math.sqrt(h)))


def distance(a: GeodeticPosition, b: GeodeticPosition) -> float:
    """Great-circle distance in meters, measured on ``a``'s sphere."""
    return a.radius * central_angle(a, b)


def heading_to(a: GeodeticPosition, b: GeodeticPosition) -> float:
    """Initial great-circle heading from ``a`` toward ``b``.

    Headings are measured from local East, counter-clockwise positive.
    """
    dlon = b.lon - a.lon
    north = math.cos(a.lat) * math.sin(b.lat) - math.sin(a.lat) * math.cos(b.lat) * math.cos(dlon)
    east = math.sin(dlon) * math.cos(b.lat)
    return math.atan2(north, east)


# ---------------------------------------------------------------------------
# Batch kernels. Inputs are (n,) arrays of lon/lat and (n, 3) vectors.


@njit
def _rotations_loop(lon, lat):
    n = lon.shape[0]
    out = np.empty((n, 3, 3))
    for i in range(n):
        so = math.sin(lon[i])
        co = math.cos(lon[i])
        sa = math.sin(lat[i])
        ca = math.cos(lat[i])
        out[i, 0, 0] = -so
        out[i, 0, 1] = co
        out[i, 0, 2] = 0.0
        out[i, 1, 0] = -co * sa
        out[i, 1, 1] = -so * sa
        out[i, 1, 2] = ca
        out[i, 2, 0] = co * ca
        out[i, 2, 1] = so * ca
        out[i, 2, 2] = sa
    return out


def _rotations_numpy(lon, lat):
    so, co = np.sin(lon), np.cos(lon)
    sa, ca = np.sin(lat), np.cos(lat)
    zero = np.zeros_like(lon)
    rows = [
        np.stack([-so, co, zero], axis=-1),
        np.stack([-co * sa, -so * sa, ca], axis=-1),
        np.stack([co * ca, so * ca, sa], axis=-1),
    ]
    return np.stack(rows, axis=-2)


@njit
def _rotate_loop(rot, v, transpose):
    n = v.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        for r in range(3):
            acc = 0.0
            for c in range(3):
                if transpose:
                    acc += rot[i, c, r] * v[i, c]
                else:
                    acc += rot[i, r, c] * v[i, c]
            out[i, r] = acc
    return out


def _rotate_numpy(rot, v, transpose):
    if transpose:
        return np.einsum("nji,nj->ni", rot, v)
    return np.einsum("nij,nj->ni", rot, v)


@njit
def _geodetic_to_ecef_loop(lon, lat, radius):
    n = lon.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        cl = math.cos(lat[i])
        out[i, 0] = radius[i] * cl * math.cos(lon[i])
        out[i, 1] = radius[i] * cl * math.sin(lon[i])
        out[i, 2] = radius[i] * math.sin(lat[i])
    return out


def _geodetic_to_ecef_numpy(lon, lat, radius):
    cl = np.cos(lat)
    return radius[:, None] * np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)


_rotations = select(_rotations_loop, _rotations_numpy)
_rotate = select(_rotate_loop, _rotate_numpy)
_to_ecef = select(_geodetic_to_ecef_loop, _geodetic_to_ecef_numpy)


def enu_rotations(lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    """Stack of ENU rotation matrices, shape ``(n, 3, 3)``."""
    return _rotations(np.ascontiguousarray(lon, dtype=float), np.ascontiguousarray(lat, dtype=float))


def geodetic_to_ecef_batch(lon, lat, radius) -> np.ndarray:
    lon = np.ascontiguousarray(lon, dtype=float)
    lat = np.ascontiguousarray(lat, dtype=float)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), lon.shape).copy()
    return _to_ecef(lon, lat, radius)


def ecef_to_enu_batch(v: np.ndarray, lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    rot = enu_rotations(lon, lat)
    return _rotate(rot, np.ascontiguousarray(v, dtype=float), False)


def enu_to_ecef_batch(v: np.ndarray, lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    rot = enu_rotations(lon, lat)
    return _rotate(rot, np.ascontiguousarray(v, dtype=float), True)
