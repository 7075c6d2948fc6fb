"""Short-horizon dead reckoning: accelerometer batches to velocity/position deltas.

Samples are linear accelerations in the local navigation frame (ENU-aligned),
already gravity-compensated — this package does no orientation handling, and
the simulator produces data under the same assumption.

Integration is semi-implicit Euler: within each sample step the velocity is
advanced first, then position advances using the *new* velocity.  Over a
default batch (4 samples x 20 ms) that keeps displacements stable and exactly
additive across consecutive batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

Vec3 = tuple[float, float, float]

DEFAULT_BATCH_SIZE = 4
DEFAULT_SAMPLE_DT_S = 0.020


@dataclass(frozen=True, slots=True)
class ImuSample:
    """One accelerometer reading: time and navigation-frame acceleration."""

    t: float
    ax: float
    ay: float
    az: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and math.isfinite(self.ax)
                and math.isfinite(self.ay) and math.isfinite(self.az)):
            raise ValueError("IMU sample components must be finite")


@dataclass(frozen=True, slots=True)
class ImuBatch:
    """A fixed-cadence run of samples integrated as one unit."""

    samples: tuple[ImuSample, ...]
    dt_each: float = DEFAULT_SAMPLE_DT_S

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError("batch must contain at least one sample")
        if self.dt_each <= 0.0 or not math.isfinite(self.dt_each):
            raise ValueError(f"dt_each {self.dt_each} must be positive and finite")
        prev = self.samples[0].t
        for sample in self.samples[1:]:
            if sample.t <= prev:
                raise ValueError("sample times must be strictly increasing")
            prev = sample.t

    @property
    def start_t(self) -> float:
        return self.samples[0].t

    @property
    def end_t(self) -> float:
        """Time the batch covers through: first sample + N sample intervals."""
        return self.samples[0].t + len(self.samples) * self.dt_each

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt_each


@dataclass(frozen=True, slots=True)
class Displacement:
    """Position and velocity change accumulated over one batch."""

    dx: float
    dy: float
    dz: float
    dvx: float
    dvy: float
    dvz: float

    @property
    def position(self) -> Vec3:
        return (self.dx, self.dy, self.dz)

    @property
    def velocity(self) -> Vec3:
        return (self.dvx, self.dvy, self.dvz)


def integrate_velocity(batch: ImuBatch, v0: Vec3 = (0.0, 0.0, 0.0)) -> Vec3:
    """Velocity after the batch: v0 + sum(a_k * dt) per axis (rectangle rule)."""
    dt = batch.dt_each
    vx, vy, vz = v0
    for s in batch.samples:
        vx += s.ax * dt
        vy += s.ay * dt
        vz += s.az * dt
    return (vx, vy, vz)


def integrate_position(batch: ImuBatch, v0: Vec3 = (0.0, 0.0, 0.0)) -> Displacement:
    """Accumulated displacement and velocity change over the batch.

    Semi-implicit scheme per sample: v += a*dt, then p += v*dt.
    """
    dt = batch.dt_each
    vx, vy, vz = v0
    px = py = pz = 0.0
    for s in batch.samples:
        vx += s.ax * dt
        vy += s.ay * dt
        vz += s.az * dt
        px += vx * dt
        py += vy * dt
        pz += vz * dt
    return Displacement(dx=px, dy=py, dz=pz,
                        dvx=vx - v0[0], dvy=vy - v0[1], dvz=vz - v0[2])


def batch_samples(samples: Iterable[ImuSample], *,
                  batch_size: int = DEFAULT_BATCH_SIZE,
                  dt_each: float = DEFAULT_SAMPLE_DT_S) -> Iterator[ImuBatch]:
    """Group a sample stream into fixed-size batches; a trailing partial group
    (fewer than batch_size samples) is dropped, matching the fixed batch cadence."""
    if batch_size < 1:
        raise ValueError(f"batch_size {batch_size} must be >= 1")
    pending: list[ImuSample] = []
    for sample in samples:
        pending.append(sample)
        if len(pending) == batch_size:
            yield ImuBatch(samples=tuple(pending), dt_each=dt_each)
            pending.clear()


def read_imu_csv(lines: Iterable[str]) -> Iterator[ImuSample]:
    """Parse an IMU log: header ``t,ax,ay,az``, then one sample per line.

    Raises ValueError on a malformed header, non-numeric rows, or
    non-increasing timestamps; blank lines and ``#`` comments are skipped.
    """
    it = iter(lines)
    header = ""
    for raw in it:
        header = raw.strip()
        if header and not header.startswith("#"):
            break
    if [c.strip() for c in header.split(",")] != ["t", "ax", "ay", "az"]:
        raise ValueError(f"expected header 't,ax,ay,az', got {header!r}")
    last_t = -math.inf
    for raw in it:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"expected 4 columns, got {len(parts)}: {line!r}")
        t = float(parts[0])
        ax = float(parts[1])
        ay = float(parts[2])
        az = float(parts[3])
        if t <= last_t:
            raise ValueError(f"timestamps must increase: {t} after {last_t}")
        last_t = t
        yield ImuSample(t=t, ax=ax, ay=ay, az=az)
