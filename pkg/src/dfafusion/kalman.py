"""Six-state Kalman filter over ECEF position/velocity, plus the fusion pipeline.

State x = (P, V): three position components (meters, ECEF) and three velocity
components (m/s).  Prediction advances position by c_i * V * dt, where the
velocity coefficient c_i comes from the motion-model selector; process noise
is the white-noise-acceleration discretization driven by sigma_accel.  The
measurement is the latest GPS fix plus dead-reckoned IMU displacement
accumulated strictly after that fix, observed through H = [I3 | 0].

The pipeline runs one predict-measure-update cycle per IMU batch (0.08 s at
the default 4 x 20 ms batching) and verifies the covariance is symmetric
positive semidefinite after every predict and update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from dfafusion.config import FusionConfig, NoiseConfig
from dfafusion.deadreckon import Displacement, ImuBatch, integrate_position
from dfafusion.geodesy import geodetic_to_ecef
from dfafusion.nmea import GpsFix
from dfafusion.selector import (
    InnovationClass,
    InnovationRecord,
    ModelSelector,
    MotionModel,
)

SYMMETRY_TOL = 1e-9
PSD_TOL = 1e-9

# Cached constants for the per-cycle hot path; all read-only.
_EYE3 = np.eye(3)
_EYE3.setflags(write=False)
_EYE6 = np.eye(6)
_EYE6.setflags(write=False)
_Q_CACHE: dict[tuple[float, float], np.ndarray] = {}
_ZERO_DISPLACEMENT = Displacement(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class FusionError(Exception):
    """Base class for filter runtime failures."""


class StaleFix(FusionError):
    """The newest GPS fix is older than the staleness horizon (GPS outage)."""


class SingularInnovationCovariance(FusionError):
    """Innovation covariance not invertible; noise configuration is degenerate."""


class CovarianceViolation(FusionError):
    """State covariance lost symmetry or positive semidefiniteness."""


@dataclass(frozen=True, slots=True)
class TransitionModel:
    """Prediction parameterization: timestep and velocity coefficient c_i."""

    dt: float
    velocity_coefficient: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt {self.dt} must be finite and > 0")
        if self.velocity_coefficient not in (0.0, 1.0, 2.0):
            raise ValueError(
                f"velocity coefficient {self.velocity_coefficient} not in {{0, 1, 2}}"
            )


@dataclass(frozen=True, slots=True)
class Measurement:
    """Composed position measurement in ECEF meters."""

    z: tuple[float, float, float]
    t: float

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (*self.z, self.t))):
            raise ValueError("measurement components must be finite")


@dataclass(frozen=True, slots=True)
class FilterState:
    """Immutable snapshot: position, velocity, covariance, and time."""

    position: np.ndarray    # (3,) meters ECEF
    velocity: np.ndarray    # (3,) m/s
    covariance: np.ndarray  # (6, 6)
    t: float

    def __post_init__(self) -> None:
        for name, arr, shape in (("position", self.position, (3,)),
                                 ("velocity", self.velocity, (3,)),
                                 ("covariance", self.covariance, (6, 6))):
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.setflags(write=False)

    def check_covariance(self) -> None:
        """Raise CovarianceViolation unless symmetric PSD within tolerance."""
        message = _symmetric_psd_violation(self.covariance.tolist())
        if message is not None:
            raise CovarianceViolation(message)


def _symmetric_psd_violation(rows: list[list[float]]) -> str | None:
    """Describe how a 6x6 matrix violates symmetric-PSD, or None if it passes.

    Runs on plain floats (the caller converts via ndarray.tolist()) because it
    executes once per fusion cycle; a Cholesky factorization of the lower
    triangle plus a PSD_TOL diagonal bump succeeds exactly when the minimum
    eigenvalue is above -PSD_TOL (up to rounding: once the asymmetry is below
    SYMMETRY_TOL the lower triangle differs from the symmetrized matrix by
    less than the tolerance slack already allowed).
    """
    total = 0.0
    for row in rows:
        total += row[0] + row[1] + row[2] + row[3] + row[4] + row[5]
    if not math.isfinite(total):
        for i in range(6):
            for j in range(6):
                if not math.isfinite(rows[i][j]):
                    return f"covariance[{i}][{j}] is {rows[i][j]!r}"
    asym = 0.0
    for i in range(6):
        row = rows[i]
        for j in range(i + 1, 6):
            d = row[j] - rows[j][i]
            if d < 0.0:
                d = -d
            if d > asym:
                asym = d
    if asym >= SYMMETRY_TOL:
        return f"covariance asymmetry {asym:.3e} >= {SYMMETRY_TOL}"
    lower = [[0.0] * 6 for _ in range(6)]
    for i in range(6):
        row_m = rows[i]
        row_i = lower[i]
        for j in range(i + 1):
            s = row_m[j] if i != j else row_m[j] + PSD_TOL
            row_j = lower[j]
            for k in range(j):
                s -= row_i[k] * row_j[k]
            if i == j:
                if s <= 0.0 or not math.isfinite(s):
                    lo = float(np.linalg.eigvalsh(0.5 * (np.asarray(rows)
                                                         + np.asarray(rows).T)).min())
                    return f"covariance min eigenvalue {lo:.3e} < -{PSD_TOL}"
                row_i[j] = math.sqrt(s)
            else:
                row_i[j] = s / row_j[j]
    return None


def _fast_state(position: np.ndarray, velocity: np.ndarray,
                covariance: np.ndarray, t: float) -> FilterState:
    """Internal constructor for predict/update results.

    Skips the shape and finiteness validation of the public constructor: the
    callers produce correctly shaped arrays by construction, and the pipeline
    guards finiteness once per cycle (innovation check in step(), plus the
    covariance health check, whose aggregate sum catches any NaN/infinity).
    """
    position.setflags(write=False)
    velocity.setflags(write=False)
    covariance.setflags(write=False)
    state = object.__new__(FilterState)
    object.__setattr__(state, "position", position)
    object.__setattr__(state, "velocity", velocity)
    object.__setattr__(state, "covariance", covariance)
    object.__setattr__(state, "t", t)
    return state


def initial_state(position: Iterable[float], t: float, noise: NoiseConfig) -> FilterState:
    """State anchored at a first fix: zero velocity, diagonal covariance."""
    p0 = np.diag([noise.p0_pos_m ** 2] * 3 + [noise.p0_vel ** 2] * 3)
    return FilterState(
        position=np.array(tuple(position), dtype=float),
        velocity=np.zeros(3),
        covariance=p0,
        t=t,
    )


def process_noise(dt: float, sigma_accel: float) -> np.ndarray:
    """White-noise-acceleration Q for one step of length dt.

    Results are cached per (dt, sigma_accel) and returned read-only; the
    pipeline calls this with the same arguments every cycle.
    """
    key = (dt, sigma_accel)
    cached = _Q_CACHE.get(key)
    if cached is not None:
        return cached
    var = sigma_accel ** 2
    qpp = var * dt ** 3 / 3.0
    qpv = var * dt ** 2 / 2.0
    qvv = var * dt
    q = np.zeros((6, 6))
    for i in range(3):
        q[i, i] = qpp
        q[i, i + 3] = qpv
        q[i + 3, i] = qpv
        q[i + 3, i + 3] = qvv
    q.setflags(write=False)
    if len(_Q_CACHE) > 64:
        _Q_CACHE.clear()
    _Q_CACHE[key] = q
    return q


def predict(state: FilterState, model: TransitionModel, noise: NoiseConfig) -> FilterState:
    """Advance the state: position += c_i * velocity * dt; propagate covariance.

    The transition matrix has c_i*dt in place of the plain dt coupling, so P0
    (c=0) freezes position regardless of velocity; process noise always uses
    the physical dt.
    """
    a = model.velocity_coefficient * model.dt
    p = state.covariance
    q = process_noise(model.dt, noise.sigma_accel)
    if a == 0.0:
        # P0: F = I, so the prediction is just P + Q with position frozen.
        return _fast_state(state.position, state.velocity, p + q,
                           state.t + model.dt)
    new_position = state.position + a * state.velocity
    # F P F^T computed on 3x3 blocks of the symmetric P: F = [[I, aI], [0, I]].
    # Exact bitwise symmetry of P is preserved: every block written below is
    # symmetric (or the exact transpose of its mirror), as is Q.
    ppp, ppv, pvv = p[:3, :3], p[:3, 3:], p[3:, 3:]
    top_right = ppv + a * pvv
    new_p = np.empty((6, 6))
    new_p[:3, :3] = ppp + a * (ppv + ppv.T) + (a * a) * pvv
    new_p[:3, 3:] = top_right
    new_p[3:, :3] = top_right.T
    new_p[3:, 3:] = pvv
    new_p += q
    return _fast_state(new_position, state.velocity, new_p, state.t + model.dt)


def update(state: FilterState, measurement: Measurement,
           noise: NoiseConfig) -> tuple[FilterState, tuple[float, float, float]]:
    """Correct with a position measurement; returns the pre-update innovation.

    Observation H = [I3 | 0]; R = sigma_gps^2 * I3.  Covariance updates in
    Joseph form, which keeps it PSD under floating point.
    """
    p = state.covariance
    r = noise.sigma_gps_m ** 2
    px, py, pz = state.position.tolist()
    zx, zy, zz = measurement.z
    y0, y1, y2 = zx - px, zy - py, zz - pz      # innovation, before any update
    # S = P[:3, :3] + r I is symmetric 3x3; invert it explicitly (adjugate
    # over determinant) — far cheaper than a LAPACK round trip at this size.
    (s00, s01, s02), (_, s11, s12), (_, _, s22) = p[:3, :3].tolist()
    s00 += r
    s11 += r
    s22 += r
    c00 = s11 * s22 - s12 * s12
    c01 = s02 * s12 - s01 * s22
    c02 = s01 * s12 - s02 * s11
    det = s00 * c00 + s01 * c01 + s02 * c02
    if det == 0.0 or not math.isfinite(det):
        raise SingularInnovationCovariance(
            f"innovation covariance singular (sigma_gps_m={noise.sigma_gps_m})"
        )
    w = 1.0 / det
    c11 = s00 * s22 - s02 * s02
    c12 = s02 * s01 - s00 * s12
    c22 = s00 * s11 - s01 * s01
    s_inv = np.array(((c00 * w, c01 * w, c02 * w),
                      (c01 * w, c11 * w, c12 * w),
                      (c02 * w, c12 * w, c22 * w)))
    gain = (s_inv @ p[:3, :]).T                 # K = P H^T S^-1, shape (6, 3)
    correction = gain @ np.array((y0, y1, y2))
    new_position = state.position + correction[:3]
    new_velocity = state.velocity + correction[3:]
    a = _EYE6.copy()
    a[:, :3] -= gain                            # A = I - K H
    new_p = a @ p @ a.T + r * (gain @ gain.T)   # Joseph form with R = r I
    new_p = 0.5 * (new_p + new_p.T)
    new_state = _fast_state(new_position, new_velocity, new_p, measurement.t)
    return new_state, (y0, y1, y2)


def _compose_from_ecef(fix_t: float, x: float, y: float, z: float,
                       offset: Displacement, now: float,
                       stale_horizon_s: float) -> Measurement:
    if now - fix_t > stale_horizon_s:
        raise StaleFix(
            f"fix at t={fix_t:.3f} is {now - fix_t:.3f}s old "
            f"(horizon {stale_horizon_s}s)"
        )
    return Measurement(z=(x + offset.dx, y + offset.dy, z + offset.dz), t=now)


def compose_measurement(fix: GpsFix, offset: Displacement, *, now: float,
                        stale_horizon_s: float = 5.0) -> Measurement:
    """Latest fix position plus IMU displacement accumulated since that fix."""
    ecef = geodetic_to_ecef(fix.position)
    return _compose_from_ecef(fix.timestamp, ecef.x_m, ecef.y_m, ecef.z_m,
                              offset, now, stale_horizon_s)


@dataclass(frozen=True, slots=True)
class CycleResult:
    """Output of one predict-measure-update cycle."""

    state: FilterState
    record: InnovationRecord
    model_used: MotionModel         # parameterized this cycle's predict
    raw_model: MotionModel          # automaton output for this innovation
    smoothed_model: MotionModel     # window output; drives the next predict
    innovation_class: InnovationClass
    measurement: Measurement


class FusionPipeline:
    """Sequential owner of filter, selector, and dead-reckoning state.

    One call to :meth:`step` per IMU batch.  A GPS fix handed to a step resets
    the displacement accumulator (offsets apply strictly after the fix), while
    the dead-reckoned velocity keeps integrating across fixes — the filter
    never re-zeroes velocity on a fix.
    """

    def __init__(self, config: FusionConfig | None = None, *,
                 static_model: MotionModel | None = None):
        self.config = config or FusionConfig()
        self.static_model = static_model
        self.selector = ModelSelector(thresholds=self.config.thresholds,
                                      window_len=self.config.window_len)
        self.state: FilterState | None = None
        self.last_fix: GpsFix | None = None
        self._fix_xyz = (0.0, 0.0, 0.0)  # ECEF of last_fix, computed once per fix
        self._offset = _ZERO_DISPLACEMENT
        self._v_dr = (0.0, 0.0, 0.0)
        self._next_model = static_model if static_model is not None else MotionModel.P1
        self._transition_models: dict[tuple[float, MotionModel], TransitionModel] = {}
        self.cycles = 0

    @property
    def initialized(self) -> bool:
        return self.state is not None

    def _initialize(self, fix: GpsFix, t: float) -> None:
        ecef = geodetic_to_ecef(fix.position)
        self._fix_xyz = (ecef.x_m, ecef.y_m, ecef.z_m)
        self.state = initial_state(self._fix_xyz, t, self.config.noise)
        self.last_fix = fix
        self._offset = _ZERO_DISPLACEMENT
        self._v_dr = (0.0, 0.0, 0.0)

    def step(self, batch: ImuBatch, fix: GpsFix | None = None) -> CycleResult | None:
        """Run one cycle; returns None until the first fix initializes the filter."""
        end_t = batch.end_t
        if self.state is None:
            if fix is None:
                return None
            self._initialize(fix, end_t)
            return None

        disp = integrate_position(batch, self._v_dr)
        self._v_dr = (self._v_dr[0] + disp.dvx, self._v_dr[1] + disp.dvy,
                      self._v_dr[2] + disp.dvz)
        if fix is not None:
            self.last_fix = fix
            ecef = geodetic_to_ecef(fix.position)
            self._fix_xyz = (ecef.x_m, ecef.y_m, ecef.z_m)
            self._offset = _ZERO_DISPLACEMENT
        else:
            o = self._offset
            self._offset = Displacement(o.dx + disp.dx, o.dy + disp.dy, o.dz + disp.dz,
                                        0.0, 0.0, 0.0)

        model_used = self._next_model
        key = (batch.duration, model_used)
        transition_model = self._transition_models.get(key)
        if transition_model is None:
            transition_model = TransitionModel(dt=key[0],
                                               velocity_coefficient=model_used.coefficient)
            self._transition_models[key] = transition_model
        predicted = predict(self.state, transition_model, self.config.noise)
        fx, fy, fz = self._fix_xyz
        measurement = _compose_from_ecef(
            self.last_fix.timestamp, fx, fy, fz, self._offset,
            end_t, self.config.stale_fix_horizon_s,
        )
        updated, y = update(predicted, measurement, self.config.noise)
        if not math.isfinite(y[0] + y[1] + y[2]):
            raise CovarianceViolation(f"non-finite innovation {y} at t={end_t:.3f}")
        updated.check_covariance()
        self.state = updated
        self.cycles += 1

        record = InnovationRecord.from_vector(y, t=end_t)
        if self.static_model is not None:
            # Static mode: selector bypassed, model pinned.
            symbol = InnovationClass.I0
            raw = smoothed = self.static_model
        else:
            smoothed = self.selector.select(record)
            trace = self.selector.last_trace
            symbol, raw = trace.innovation_class, trace.raw_model
        self._next_model = smoothed
        return CycleResult(state=updated, record=record, model_used=model_used,
                           raw_model=raw, smoothed_model=smoothed,
                           innovation_class=symbol, measurement=measurement)

    def run(self, batches: Iterable[ImuBatch],
            fixes: Iterable[GpsFix]) -> Iterator[CycleResult]:
        """Drive the pipeline from merged streams.

        A fix is consumed by the first batch whose coverage reaches the fix
        timestamp; if several fixes fall in one batch the newest wins.
        """
        fix_iter = iter(fixes)
        pending = next(fix_iter, None)
        for batch in batches:
            newest: GpsFix | None = None
            end_t = batch.end_t
            while pending is not None and pending.timestamp <= end_t:
                newest = pending
                pending = next(fix_iter, None)
            result = self.step(batch, newest)
            if result is not None:
                yield result
