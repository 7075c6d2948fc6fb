"""Synthetic sensor streams: ground-truth trajectories plus noisy GPS/IMU.

Trajectories live on a local ENU tangent plane about a configurable geodetic
origin (up stays 0; altitude is the origin's).  GPS epochs add isotropic
per-axis Gaussian noise and are emitted as checksummed GGA text; IMU samples
are the profile's exact piecewise acceleration plus Gaussian noise, in the
same ENU-aligned, gravity-free frame the dead-reckoning layer assumes.

Randomness comes from numpy's PCG64 — a named, seedable generator with
stable cross-platform output — so identical (profile, config) pairs yield
byte-identical streams.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from dfafusion.deadreckon import ImuBatch, ImuSample
from dfafusion.geodesy import (
    EnuPosition,
    GeodeticPosition,
    WGS84_A,
    WGS84_E2,
    ecef_to_enu,
    enu_to_ecef,
    geodetic_to_ecef,
)
from dfafusion.nmea import FixQuality, GpsFix, make_gga_line

Vec3 = tuple[float, float, float]

ARENA_LIMIT_M = 10_000.0  # profiles must stay within 10 km of the origin
DEFAULT_ORIGIN = GeodeticPosition(45.0, 9.0, 200.0)


@dataclass(frozen=True)
class MotionProfile:
    """Piecewise-linear planar motion description.

    kind selects the interpretation:
      stationary         -- fixed at the ENU origin.
      constant_walk      -- speed + compass heading from t=0.
      varying_speed      -- schedule of (start_t, speed) changes along a
                            heading.  With ramp_s = 0 the speed steps
                            instantaneously (acceleration zero on every
                            segment); with ramp_s > 0 each change is a linear
                            ramp over ramp_s seconds, so the acceleration is a
                            finite rectangular pulse the IMU genuinely
                            observes.
      scripted_waypoints -- timed (t, east, north) waypoints joined linearly.
    """

    kind: str
    speed_mps: float = 0.0
    heading_deg: float = 90.0       # compass: 0 = north, 90 = east
    schedule: tuple[tuple[float, float], ...] = ()
    waypoints: tuple[tuple[float, float, float], ...] = ()
    ramp_s: float = 0.0             # duration of each speed change (varying_speed)

    def __post_init__(self) -> None:
        if self.kind not in ("stationary", "constant_walk", "varying_speed",
                             "scripted_waypoints"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "constant_walk" and self.speed_mps < 0.0:
            raise ValueError("speed must be >= 0")
        if self.ramp_s < 0.0 or not math.isfinite(self.ramp_s):
            raise ValueError("ramp_s must be finite and >= 0")
        if self.kind == "varying_speed":
            if not self.schedule:
                raise ValueError("varying_speed needs a (start_t, speed) schedule")
            times = [t for t, _ in self.schedule]
            if times != sorted(times) or len(set(times)) != len(times):
                raise ValueError("schedule times must strictly increase")
            if any(speed < 0.0 for _, speed in self.schedule):
                raise ValueError("speeds must be >= 0")
            if self.ramp_s > 0.0:
                gaps = [b - a for a, b in zip(times, times[1:])]
                if any(gap < self.ramp_s for gap in gaps):
                    raise ValueError("schedule entries closer than ramp_s would "
                                     "overlap speed ramps")
        if self.kind == "scripted_waypoints":
            if len(self.waypoints) < 2:
                raise ValueError("scripted_waypoints needs at least two waypoints")
            times = [t for t, _, _ in self.waypoints]
            if times != sorted(times) or len(set(times)) != len(times):
                raise ValueError("waypoint times must strictly increase")
            for _, e, n in self.waypoints:
                if math.hypot(e, n) > ARENA_LIMIT_M:
                    raise ValueError(f"waypoint ({e}, {n}) beyond {ARENA_LIMIT_M} m")

    def _heading_unit(self) -> tuple[float, float]:
        h = math.radians(self.heading_deg)
        return (math.sin(h), math.cos(h))  # (east, north)


def stationary() -> MotionProfile:
    return MotionProfile(kind="stationary")


def constant_walk(speed_mps: float, heading_deg: float = 90.0) -> MotionProfile:
    return MotionProfile(kind="constant_walk", speed_mps=speed_mps,
                         heading_deg=heading_deg)


def varying_speed(schedule: tuple[tuple[float, float], ...],
                  heading_deg: float = 90.0, ramp_s: float = 0.0) -> MotionProfile:
    return MotionProfile(kind="varying_speed", schedule=tuple(schedule),
                         heading_deg=heading_deg, ramp_s=ramp_s)


def scripted_waypoints(waypoints: tuple[tuple[float, float, float], ...]) -> MotionProfile:
    return MotionProfile(kind="scripted_waypoints", waypoints=tuple(waypoints))


@dataclass(frozen=True)
class SimConfig:
    """Sensor synthesis parameters (cadences, noise, anchor point)."""

    seed: int = 0
    duration_s: float = 600.0
    gps_period_s: float = 1.0
    imu_period_s: float = 0.020
    gps_sigma_m: float = 2.5
    accel_sigma: float = 0.05
    origin: GeodeticPosition = field(default_factory=lambda: DEFAULT_ORIGIN)

    def __post_init__(self) -> None:
        if self.duration_s <= 0.0 or self.duration_s >= 86_400.0:
            raise ValueError("duration must be in (0, 86400) seconds")
        if self.gps_period_s <= 0.0 or self.imu_period_s <= 0.0:
            raise ValueError("sensor periods must be > 0")
        if self.gps_sigma_m < 0.0 or self.accel_sigma < 0.0:
            raise ValueError("noise sigmas must be >= 0")


def truth_at(profile: MotionProfile, t: float) -> tuple[Vec3, Vec3, Vec3]:
    """Exact (position, velocity, acceleration) in ENU meters at time t >= 0."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if profile.kind == "stationary":
        return (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)

    if profile.kind == "constant_walk":
        ue, un = profile._heading_unit()
        v = profile.speed_mps
        return ((v * t * ue, v * t * un, 0.0), (v * ue, v * un, 0.0), (0.0, 0.0, 0.0))

    if profile.kind == "varying_speed":
        ue, un = profile._heading_unit()
        ramp = profile.ramp_s
        distance = 0.0
        speed = 0.0  # before the first schedule entry the subject stands still
        accel = 0.0
        prev = 0.0   # speed entering the current schedule segment
        for k, (start, seg_speed) in enumerate(profile.schedule):
            if t < start:
                break
            end = profile.schedule[k + 1][0] if k + 1 < len(profile.schedule) else math.inf
            tau = min(t, end) - start
            delta = seg_speed - prev
            if ramp > 0.0 and delta != 0.0:
                # Linear speed ramp over [start, start + ramp], cruise after.
                u = tau if tau < ramp else ramp
                distance += prev * u + delta * u * u / (2.0 * ramp)
                if tau > ramp:
                    distance += seg_speed * (tau - ramp)
                if t < end and tau < ramp:
                    speed = prev + delta * (tau / ramp)
                    accel = delta / ramp
                else:
                    speed = seg_speed
                    accel = 0.0
            else:
                distance += seg_speed * tau
                speed = seg_speed
                accel = 0.0
            prev = seg_speed
        return ((distance * ue, distance * un, 0.0),
                (speed * ue, speed * un, 0.0),
                (accel * ue, accel * un, 0.0))

    # scripted_waypoints: piecewise-linear through timed points, clamped ends.
    times = [wp[0] for wp in profile.waypoints]
    if t <= times[0]:
        _, e, n = profile.waypoints[0]
        return ((e, n, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    if t >= times[-1]:
        _, e, n = profile.waypoints[-1]
        return ((e, n, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    k = bisect_right(times, t) - 1
    t0, e0, n0 = profile.waypoints[k]
    t1, e1, n1 = profile.waypoints[k + 1]
    frac = (t - t0) / (t1 - t0)
    ve, vn = (e1 - e0) / (t1 - t0), (n1 - n0) / (t1 - t0)
    return ((e0 + frac * (e1 - e0), n0 + frac * (n1 - n0), 0.0),
            (ve, vn, 0.0), (0.0, 0.0, 0.0))


def _ecef_to_geodetic(x: float, y: float, z: float) -> GeodeticPosition:
    """Iterative inversion of the forward conversion (simulator-internal).

    Fixed-point iteration on latitude/height; converges to sub-nanometer for
    any point near the surface, which keeps zero-noise streams self-consistent
    through the GGA text round trip.
    """
    lon = math.degrees(math.atan2(y, x))
    p = math.hypot(x, y)
    lat_rad = math.atan2(z, p * (1.0 - WGS84_E2))
    h = 0.0
    for _ in range(12):
        sin_lat = math.sin(lat_rad)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        h = p / math.cos(lat_rad) - n
        lat_rad = math.atan2(z, p * (1.0 - WGS84_E2 * n / (n + h)))
    return GeodeticPosition(math.degrees(lat_rad), lon, h)


def enu_to_geodetic(pos: EnuPosition, origin: GeodeticPosition) -> GeodeticPosition:
    ecef = enu_to_ecef(pos, origin)
    return _ecef_to_geodetic(ecef.x_m, ecef.y_m, ecef.z_m)


@dataclass(frozen=True)
class SimStreams:
    """Rendered sensor logs: GGA lines, IMU CSV lines, truth CSV lines."""

    gga_lines: tuple[str, ...]
    imu_lines: tuple[str, ...]
    truth_lines: tuple[str, ...]

    def gga_text(self) -> str:
        return "\n".join(self.gga_lines) + "\n"

    def imu_text(self) -> str:
        return "\n".join(self.imu_lines) + "\n"

    def truth_text(self) -> str:
        return "\n".join(self.truth_lines) + "\n"


def _noise_matrices(cfg: SimConfig) -> tuple[int, int, np.ndarray, np.ndarray]:
    """Seeded GPS and IMU noise draws shared by every stream renderer.

    Drawing both matrices up front, GPS first, fixes the generator consumption
    order so text and object streams from the same config are statistically
    identical samples of the same run.
    """
    rng = np.random.default_rng(np.random.PCG64(cfg.seed))
    n_gps = int(math.floor(cfg.duration_s / cfg.gps_period_s))
    n_imu = int(math.floor(cfg.duration_s / cfg.imu_period_s))
    gps_noise = rng.normal(scale=cfg.gps_sigma_m, size=(n_gps, 3)) \
        if cfg.gps_sigma_m > 0.0 else np.zeros((n_gps, 3))
    imu_noise = rng.normal(scale=cfg.accel_sigma, size=(n_imu, 3)) \
        if cfg.accel_sigma > 0.0 else np.zeros((n_imu, 3))
    return n_gps, n_imu, gps_noise, imu_noise


def emit_streams(profile: MotionProfile, cfg: SimConfig) -> SimStreams:
    """Render deterministic sensor logs for one simulation run."""
    n_gps, n_imu, gps_noise, imu_noise = _noise_matrices(cfg)

    gga_lines = []
    for k in range(n_gps):
        t = (k + 1) * cfg.gps_period_s
        pos, _, _ = truth_at(profile, t)
        noisy = EnuPosition(float(pos[0] + gps_noise[k, 0]),
                            float(pos[1] + gps_noise[k, 1]),
                            float(pos[2] + gps_noise[k, 2]))
        geo = enu_to_geodetic(noisy, cfg.origin)
        gga_lines.append(make_gga_line(t, geo, quality=FixQuality.GPS,
                                       num_satellites=8, hdop=0.9))

    imu_lines = ["t,ax,ay,az"]
    truth_lines = [
        "# origin_lat_deg={!r} origin_lon_deg={!r} origin_alt_m={!r}".format(
            cfg.origin.latitude_deg, cfg.origin.longitude_deg, cfg.origin.altitude_m),
        "t,east,north,up,ve,vn,vu",
    ]
    for k in range(n_imu):
        t = k * cfg.imu_period_s
        pos, vel, acc = truth_at(profile, t)
        ax, ay, az = (float(acc[i] + imu_noise[k, i]) for i in range(3))
        imu_lines.append(f"{t!r},{ax!r},{ay!r},{az!r}")
        truth_lines.append(f"{t!r},{pos[0]!r},{pos[1]!r},{pos[2]!r},"
                           f"{vel[0]!r},{vel[1]!r},{vel[2]!r}")
    return SimStreams(gga_lines=tuple(gga_lines), imu_lines=tuple(imu_lines),
                      truth_lines=tuple(truth_lines))


def simulate_objects(profile: MotionProfile, cfg: SimConfig, *,
                     batch_size: int = 4) -> tuple[tuple[GpsFix, ...],
                                                   tuple[ImuBatch, ...]]:
    """The same simulated run as emit_streams, as in-memory fix/batch objects.

    Uses identical noise draws as the text renderer for the same config, but
    skips NMEA/CSV formatting and re-parsing, which makes it the right input
    for statistical studies over many seeds.  (Fix positions here are exact;
    the text path quantizes angles to the GGA field width, a sub-centimeter
    difference.)  IMU samples are grouped batch_size at a time with any
    partial tail dropped, mirroring the batching of the parsing path.
    """
    n_gps, n_imu, gps_noise, imu_noise = _noise_matrices(cfg)

    fixes = []
    for k in range(n_gps):
        t = (k + 1) * cfg.gps_period_s
        pos, _, _ = truth_at(profile, t)
        noisy = EnuPosition(float(pos[0] + gps_noise[k, 0]),
                            float(pos[1] + gps_noise[k, 1]),
                            float(pos[2] + gps_noise[k, 2]))
        fixes.append(GpsFix(timestamp=t, position=enu_to_geodetic(noisy, cfg.origin),
                            fix_quality=FixQuality.GPS, num_satellites=8, hdop=0.9))

    noise_rows = imu_noise.tolist()
    dt = cfg.imu_period_s
    batches = []
    pending = []
    for k in range(n_imu):
        t = k * dt
        _, _, acc = truth_at(profile, t)
        nx, ny, nz = noise_rows[k]
        pending.append(ImuSample(t, acc[0] + nx, acc[1] + ny, acc[2] + nz))
        if len(pending) == batch_size:
            batches.append(ImuBatch(samples=tuple(pending), dt_each=dt))
            pending = []
    return tuple(fixes), tuple(batches)


PROFILES = {
    "stationary": lambda: stationary(),
    "constant_walk": lambda: constant_walk(1.4, heading_deg=90.0),
    # The speed-step sequence used throughout the replay comparisons:
    # rest, walk, rest, brisk walk — equal 60 s legs, repeating.  Each change
    # ramps over 2 s (human-scale accelerations the IMU actually measures).
    "varying_speed": lambda: varying_speed(
        ((0.0, 0.0), (60.0, 1.4), (120.0, 0.0), (180.0, 2.8), (240.0, 0.0),
         (300.0, 1.4), (360.0, 0.0), (420.0, 2.8), (480.0, 0.0)),
        heading_deg=90.0, ramp_s=2.0,
    ),
}


def named_profile(name: str) -> MotionProfile:
    try:
        return PROFILES[name]()
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


class LiveSimulator:
    """Steerable real-time twin of emit_streams for the interactive game.

    Truth integrates commanded planar acceleration (semi-implicit, per IMU
    sample); sensors get the same noise model as the offline generator.  One
    :meth:`next_batch` call yields the next IMU batch plus, when a GPS epoch
    has been crossed, a noisy fix — ready to feed a FusionPipeline step.
    """

    def __init__(self, cfg: SimConfig, *, batch_size: int = 4):
        self.cfg = cfg
        self.batch_size = batch_size
        self._rng = np.random.default_rng(np.random.PCG64(cfg.seed))
        self.t = 0.0
        self.position = np.zeros(3)   # ENU
        self.velocity = np.zeros(3)
        self.command = np.zeros(3)    # commanded acceleration (east, north, 0)
        self._next_gps_t = 0.0        # first fix immediately, then every period

    def set_command(self, ax: float, ay: float) -> None:
        self.command = np.array([ax, ay, 0.0])

    def _make_fix(self, t: float) -> GpsFix:
        noise = (self._rng.normal(scale=self.cfg.gps_sigma_m, size=3)
                 if self.cfg.gps_sigma_m > 0.0 else np.zeros(3))
        noisy = EnuPosition(self.position[0] + noise[0], self.position[1] + noise[1],
                            self.position[2] + noise[2])
        return GpsFix(timestamp=t, position=enu_to_geodetic(noisy, self.cfg.origin),
                      fix_quality=FixQuality.GPS, num_satellites=8, hdop=0.9)

    def next_batch(self) -> tuple[ImuBatch, GpsFix | None, Vec3]:
        dt = self.cfg.imu_period_s
        fix: GpsFix | None = None
        samples = []
        for _ in range(self.batch_size):
            if self.t >= self._next_gps_t:
                fix = self._make_fix(self.t)
                self._next_gps_t += self.cfg.gps_period_s
            accel = self.command
            noise = (self._rng.normal(scale=self.cfg.accel_sigma, size=3)
                     if self.cfg.accel_sigma > 0.0 else np.zeros(3))
            samples.append(ImuSample(self.t, float(accel[0] + noise[0]),
                                     float(accel[1] + noise[1]), float(noise[2])))
            self.velocity = self.velocity + accel * dt
            self.position = self.position + self.velocity * dt
            self.t += dt
        batch = ImuBatch(samples=tuple(samples), dt_each=dt)
        return batch, fix, (float(self.position[0]), float(self.position[1]),
                            float(self.position[2]))
