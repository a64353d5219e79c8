"""Great-circle distances between branch terminals, in statute miles."""

from __future__ import annotations

from math import asin, cos, radians, sin, sqrt
from typing import Sequence

from .exceptions import InvalidCoordinateError

EARTH_RADIUS_MILES = 3958.8

Point = tuple[float, float]


def _check_point(point: Sequence[float]) -> Point:
    lat, lon = float(point[0]), float(point[1])
    if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
        raise InvalidCoordinateError(f"coordinate ({lat}, {lon}) is out of range")
    return lat, lon


def haversine_miles(a: Sequence[float], b: Sequence[float]) -> float:
    """Haversine distance between two (lat, lon) points in miles."""
    lat1, lon1 = _check_point(a)
    lat2, lon2 = _check_point(b)
    phi1, phi2 = radians(lat1), radians(lat2)
    dphi = radians(lat2 - lat1)
    dlam = radians(lon2 - lon1)
    h = sin(dphi / 2.0) ** 2 + cos(phi1) * cos(phi2) * sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_MILES * asin(min(1.0, sqrt(h)))


def geo_error(estimated: Sequence[Sequence[float]], actual: Sequence[Sequence[float]]) -> float:
    """Smallest terminal-to-terminal distance between two terminal sets.

    Each argument is a nonempty sequence of (lat, lon) points, normally the
    two ends of a branch. Identical points give exactly 0.0, so a correctly
    identified branch always scores zero.
    """
    if not len(estimated) or not len(actual):
        raise ValueError("terminal sets must be nonempty")
    return min(haversine_miles(e, a) for e in estimated for a in actual)
