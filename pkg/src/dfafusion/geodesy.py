"""WGS84 geodetic/ECEF conversions and local tangent-plane (ENU) projection.

Angles cross the API boundary in degrees (matching GPS sentence payloads)
and are converted to radians once, at computation entry.  All arithmetic is
64-bit; single precision loses whole meters at ECEF magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# WGS84 ellipsoid: equatorial radius and eccentricity squared.
WGS84_A = 6_378_137.0
WGS84_E2 = 6.69437999e-3
# Semi-minor axis, derivable from b^2 = a^2 (1 - e^2).
WGS84_B = WGS84_A * math.sqrt(1.0 - WGS84_E2)


@dataclass(frozen=True)
class GeodeticPosition:
    """A GPS fix in geodetic coordinates on the WGS84 ellipsoid.

    Latitude must lie in [-90, 90]; longitude is normalized to (-180, 180]
    on construction.  Altitude is ellipsoidal height in meters (ingested
    as-given; no geoid correction is applied anywhere in this package).
    """

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.latitude_deg) and math.isfinite(self.longitude_deg)
                and math.isfinite(self.altitude_m)):
            raise ValueError("geodetic components must be finite")
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude {self.latitude_deg} outside [-90, 90]")
        lon = self.longitude_deg % 360.0
        if lon > 180.0:
            lon -= 360.0
        object.__setattr__(self, "longitude_deg", lon)


@dataclass(frozen=True)
class EcefPosition:
    """Earth-centered Earth-fixed Cartesian position in meters."""

    x_m: float
    y_m: float
    z_m: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_m) and math.isfinite(self.y_m)
                and math.isfinite(self.z_m)):
            raise ValueError("ECEF components must be finite")


@dataclass(frozen=True)
class EnuPosition:
    """East-North-Up offset in meters from a declared geodetic origin."""

    east_m: float
    north_m: float
    up_m: float


def prime_vertical_radius(latitude_deg: float) -> float:
    """Radius of curvature in the prime vertical, N = a / sqrt(1 - e2 sin^2(lat)).

    Always >= the equatorial radius since the denominator is <= 1.
    """
    if not -90.0 <= latitude_deg <= 90.0:
        raise ValueError(f"latitude {latitude_deg} outside [-90, 90]")
    sin_lat = math.sin(math.radians(latitude_deg))
    return WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)


def geodetic_to_ecef(p: GeodeticPosition) -> EcefPosition:
    """Convert geodetic coordinates to ECEF meters."""
    lat = math.radians(p.latitude_deg)
    lon = math.radians(p.longitude_deg)
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    sin_lon, cos_lon = math.sin(lon), math.cos(lon)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    h = p.altitude_m
    return EcefPosition(
        x_m=(n + h) * cos_lat * cos_lon,
        y_m=(n + h) * cos_lat * sin_lon,
        z_m=((1.0 - WGS84_E2) * n + h) * sin_lat,
    )


def ecef_to_geodetic(p: EcefPosition) -> GeodeticPosition:
    """Invert :func:`geodetic_to_ecef` by fixed-point iteration on latitude.

    Converges to sub-nanodegree latitude in a handful of rounds for any
    point outside the Earth's core; points on the polar axis short-circuit
    to the exact closed form.
    """
    lon = math.degrees(math.atan2(p.y_m, p.x_m))
    rho = math.hypot(p.x_m, p.y_m)
    if rho < 1e-9:
        lat = math.copysign(90.0, p.z_m) if p.z_m != 0.0 else 0.0
        return GeodeticPosition(lat, lon, abs(p.z_m) - WGS84_B)
    lat = math.atan2(p.z_m, rho * (1.0 - WGS84_E2))
    for _ in range(10):
        sin_lat = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        h = rho / math.cos(lat) - n
        new_lat = math.atan2(p.z_m, rho * (1.0 - WGS84_E2 * n / (n + h)))
        if abs(new_lat - lat) < 1e-14:
            lat = new_lat
            break
        lat = new_lat
    sin_lat = math.sin(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    h = rho / math.cos(lat) - n
    return GeodeticPosition(math.degrees(lat), lon, h)


def _enu_rotation(origin: GeodeticPosition) -> tuple[float, float, float, float]:
    lat = math.radians(origin.latitude_deg)
    lon = math.radians(origin.longitude_deg)
    return math.sin(lat), math.cos(lat), math.sin(lon), math.cos(lon)


def ecef_to_enu(p: EcefPosition, origin: GeodeticPosition) -> EnuPosition:
    """Project an ECEF point onto the local tangent plane at ``origin``."""
    o = geodetic_to_ecef(origin)
    dx, dy, dz = p.x_m - o.x_m, p.y_m - o.y_m, p.z_m - o.z_m
    sin_lat, cos_lat, sin_lon, cos_lon = _enu_rotation(origin)
    return EnuPosition(
        east_m=-sin_lon * dx + cos_lon * dy,
        north_m=-sin_lat * cos_lon * dx - sin_lat * sin_lon * dy + cos_lat * dz,
        up_m=cos_lat * cos_lon * dx + cos_lat * sin_lon * dy + sin_lat * dz,
    )


def enu_to_ecef(p: EnuPosition, origin: GeodeticPosition) -> EcefPosition:
    """Inverse of :func:`ecef_to_enu` for the same origin."""
    o = geodetic_to_ecef(origin)
    sin_lat, cos_lat, sin_lon, cos_lon = _enu_rotation(origin)
    e, n, u = p.east_m, p.north_m, p.up_m
    return EcefPosition(
        x_m=o.x_m - sin_lon * e - sin_lat * cos_lon * n + cos_lat * cos_lon * u,
        y_m=o.y_m + cos_lon * e - sin_lat * sin_lon * n + cos_lat * sin_lon * u,
        z_m=o.z_m + cos_lat * n + sin_lat * u,
    )
