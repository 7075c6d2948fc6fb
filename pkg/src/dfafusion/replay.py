"""Offline replay of recorded GPS/IMU logs through the fusion pipeline.

Reads an NMEA GGA log and an IMU CSV side by side, runs the filter in
``static`` (model pinned at P1) or ``dfa`` (automaton-selected) mode, and
produces per-cycle series — trajectory, innovation, model trace — plus a
scalar :class:`RunReport`.  Writers render the series as CSV and as a
model-colored GeoJSON LineString for map display.  Everything here is
deterministic: the same logs and config always produce byte-identical
outputs.
"""

from __future__ import annotations

import gc
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .config import FusionConfig
from .deadreckon import ImuSample, batch_samples, read_imu_csv
from .geodesy import EcefPosition, ecef_to_geodetic
from .kalman import FusionPipeline
from .nmea import GpsFix, NmeaError, parse_sentence, sentence_to_fix
from .selector import MotionModel

# Model-index palette shared with the browser client; segment colors in the
# GeoJSON output and the UI trail must agree so plots are comparable.
MODEL_COLORS = {0: "#1f77b4", 1: "#2ca02c", 2: "#d62728"}

SEGMENT_COUNT = 10

MODES = ("static", "dfa")


class ReplayError(Exception):
    """Base for replay-level failures (bad logs, mismatched comparisons)."""


class EmptyOverlap(ReplayError):
    """The GPS and IMU logs share no usable time window."""


class UnparseableLog(ReplayError):
    """A log line could not be parsed; carries the file and line number."""

    def __init__(self, path: str | Path, line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason


class MismatchedInputs(ReplayError):
    """Two reports being compared came from different input logs."""


class TrajectoryRow(NamedTuple):
    """Fused position at one cycle, tagged with the active smoothed model."""

    t: float
    latitude_deg: float
    longitude_deg: float
    altitude_m: float
    model: int


class InnovationRow(NamedTuple):
    """Innovation vector and magnitude at one cycle."""

    t: float
    y_x: float
    y_y: float
    y_z: float
    magnitude: float


class ModelRow(NamedTuple):
    """Selector trace at one cycle: raw and smoothed model plus the class."""

    t: float
    raw_model: int
    smoothed_model: int
    innovation_class: int
    magnitude: float


@dataclass(frozen=True, slots=True)
class RunReport:
    """Scalar summary of one replay run."""

    mode: str
    rms_innovation_m: float
    max_innovation_m: float
    occupancy: tuple[float, float, float]   # fraction of cycles in P0, P1, P2
    cycles: int
    wall_time_s: float
    segment_rms: tuple[float, ...]          # per tenth-of-run innovation RMS
    input_digest: str                       # joint hash of both input logs

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.rms_innovation_m < 0.0:
            raise ValueError("rms_innovation_m must be >= 0")
        if abs(sum(self.occupancy) - 1.0) > 1e-9:
            raise ValueError(f"occupancy fractions {self.occupancy} must sum to 1")


class FusionRun(NamedTuple):
    """Everything one replay produces; unpacks as (trajectory, innovations, models, report)."""

    trajectory: tuple[TrajectoryRow, ...]
    innovations: tuple[InnovationRow, ...]
    models: tuple[ModelRow, ...]
    report: RunReport


def read_gps_log(path: str | Path) -> tuple[GpsFix, ...]:
    """Strictly parse a GGA log into fixes.

    Unlike the lenient streaming ingest, a replay treats any malformed line
    as fatal: silently dropping lines would shift the comparison window.
    Valid sentences that simply carry no usable fix are skipped.
    """
    fixes: list[GpsFix] = []
    text = Path(path).read_text(encoding="ascii", errors="replace")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            fix = sentence_to_fix(parse_sentence(line))
        except NmeaError as err:
            raise UnparseableLog(path, lineno, str(err)) from err
        if fix is not None:
            fixes.append(fix)
    return tuple(fixes)


def read_imu_log(path: str | Path) -> tuple[ImuSample, ...]:
    """Strictly parse an IMU CSV, reporting the offending line on failure."""
    lines = Path(path).read_text(encoding="ascii", errors="replace").splitlines()
    try:
        return tuple(read_imu_csv(lines))
    except ValueError:
        # Parsing is deterministic, so replaying through a line counter hits
        # the same failure; keeping the counter off the fast path makes the
        # bulk ingest measurably cheaper for hour-scale logs.
        position = [0]

        def numbered(items: Iterable[str]) -> Iterator[str]:
            for lineno, item in enumerate(items, start=1):
                position[0] = lineno
                yield item

        try:
            tuple(read_imu_csv(numbered(lines)))
        except ValueError as err:
            raise UnparseableLog(path, position[0], str(err)) from err
        raise  # pragma: no cover - the replay cannot succeed after a failure


def _digest(*paths: str | Path) -> str:
    h = hashlib.sha256()
    for path in paths:
        h.update(Path(path).read_bytes())
        h.update(b"\x00")
    return h.hexdigest()


def _segment_rms(magnitudes: list[float], segments: int = SEGMENT_COUNT) -> tuple[float, ...]:
    """RMS innovation over equal consecutive slices of the cycle sequence."""
    n = len(magnitudes)
    out: list[float] = []
    for k in range(segments):
        lo, hi = (n * k) // segments, (n * (k + 1)) // segments
        chunk = magnitudes[lo:hi]
        out.append(math.sqrt(sum(m * m for m in chunk) / len(chunk)) if chunk else 0.0)
    return tuple(out)


def run_fusion(gps_log: str | Path, imu_log: str | Path,
               config: FusionConfig | None = None,
               mode: str = "dfa") -> FusionRun:
    """Replay a pair of logs through the filter and summarize the run.

    ``static`` pins the motion model at P1 for every cycle; ``dfa`` lets the
    selector drive it.  Raises :class:`UnparseableLog` on any malformed line
    and :class:`EmptyOverlap` when the logs share no time window in which at
    least one full cycle can run.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    started = time.perf_counter()
    config = config or FusionConfig()
    fixes = read_gps_log(gps_log)
    samples = read_imu_log(imu_log)
    batches = tuple(batch_samples(samples, batch_size=config.batch_size,
                                  dt_each=config.imu_dt_s))
    if not fixes or not batches or (
            min(fixes[-1].timestamp, batches[-1].end_t)
            <= max(fixes[0].timestamp, batches[0].start_t)):
        raise EmptyOverlap(
            f"no shared time window between {gps_log} and {imu_log}")

    pipeline = FusionPipeline(
        config, static_model=MotionModel.P1 if mode == "static" else None)
    trajectory: list[TrajectoryRow] = []
    innovations: list[InnovationRow] = []
    models: list[ModelRow] = []
    magnitudes: list[float] = []
    counts = [0, 0, 0]
    # The loop allocates heavily but creates no reference cycles; pausing the
    # cycle collector keeps hour-scale replays from paying for thousands of
    # pointless generational scans.
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for result in pipeline.run(iter(batches), iter(fixes)):
            record = result.record
            x, y, z = result.state.position.tolist()
            geo = ecef_to_geodetic(EcefPosition(x, y, z))
            model_index = int(result.smoothed_model)
            trajectory.append(TrajectoryRow(
                record.t, geo.latitude_deg, geo.longitude_deg, geo.altitude_m,
                model_index))
            innovations.append(InnovationRow(
                record.t, record.y[0], record.y[1], record.y[2],
                record.magnitude))
            models.append(ModelRow(record.t, int(result.raw_model), model_index,
                                   int(result.innovation_class),
                                   record.magnitude))
            magnitudes.append(record.magnitude)
            counts[model_index] += 1
    finally:
        if gc_was_enabled:
            gc.enable()

    cycles = len(magnitudes)
    if cycles == 0:
        raise EmptyOverlap(
            f"logs overlap too briefly for a single cycle "
            f"({gps_log}, {imu_log})")
    report = RunReport(
        mode=mode,
        rms_innovation_m=math.sqrt(sum(m * m for m in magnitudes) / cycles),
        max_innovation_m=max(magnitudes),
        occupancy=(counts[0] / cycles, counts[1] / cycles, counts[2] / cycles),
        cycles=cycles,
        wall_time_s=time.perf_counter() - started,
        segment_rms=_segment_rms(magnitudes),
        input_digest=_digest(gps_log, imu_log),
    )
    return FusionRun(tuple(trajectory), tuple(innovations), tuple(models), report)


@dataclass(frozen=True, slots=True)
class ComparisonSummary:
    """Outcome of comparing run A against run B on identical inputs."""

    mode_a: str
    mode_b: str
    rms_a: float
    rms_b: float
    rms_delta: float                    # rms_a - rms_b (negative: A tighter)
    improvement_percent: float          # how much A improves over B
    segment_winners: tuple[str, ...]    # "a" | "b" | "tie" per segment


def compare(report_a: RunReport, report_b: RunReport) -> ComparisonSummary:
    """Compare two runs of the *same* logs; raises MismatchedInputs otherwise."""
    if report_a.input_digest != report_b.input_digest:
        raise MismatchedInputs("reports were produced from different input logs")
    if len(report_a.segment_rms) != len(report_b.segment_rms):
        raise MismatchedInputs("reports use different segmentations")
    rms_a, rms_b = report_a.rms_innovation_m, report_b.rms_innovation_m
    improvement = 0.0 if rms_b == 0.0 else (rms_b - rms_a) / rms_b * 100.0
    winners = tuple(
        "tie" if a == b else ("a" if a < b else "b")
        for a, b in zip(report_a.segment_rms, report_b.segment_rms))
    return ComparisonSummary(
        mode_a=report_a.mode, mode_b=report_b.mode,
        rms_a=rms_a, rms_b=rms_b, rms_delta=rms_a - rms_b,
        improvement_percent=improvement, segment_winners=winners)


def render_comparison(summary: ComparisonSummary) -> str:
    """Human-readable comparison table for the command line."""
    lines = [
        f"A ({summary.mode_a}) rms innovation: {summary.rms_a:.6f} m",
        f"B ({summary.mode_b}) rms innovation: {summary.rms_b:.6f} m",
        f"delta (A-B): {summary.rms_delta:+.6f} m",
        f"improvement of A over B: {summary.improvement_percent:+.2f}%",
        "segment winners (one per tenth of the run):",
        "  " + " ".join(f"{k}:{w}" for k, w in enumerate(summary.segment_winners)),
    ]
    return "\n".join(lines) + "\n"


def write_trajectory_csv(rows: Iterable[TrajectoryRow], path: str | Path) -> None:
    lines = ["t,latitude_deg,longitude_deg,altitude_m,model"]
    lines += [f"{r.t!r},{r.latitude_deg!r},{r.longitude_deg!r},"
              f"{r.altitude_m!r},{r.model}" for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_innovation_csv(rows: Iterable[InnovationRow], path: str | Path) -> None:
    lines = ["t,y_x,y_y,y_z,magnitude"]
    lines += [f"{r.t!r},{r.y_x!r},{r.y_y!r},{r.y_z!r},{r.magnitude!r}"
              for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_models_csv(rows: Iterable[ModelRow], path: str | Path) -> None:
    lines = ["t,raw_model,smoothed_model,innovation_class,magnitude"]
    lines += [f"{r.t!r},{r.raw_model},{r.smoothed_model},"
              f"{r.innovation_class},{r.magnitude!r}" for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def trajectory_geojson(rows: Iterable[TrajectoryRow]) -> dict:
    """Split the trajectory into one LineString feature per model segment.

    Consecutive rows with the same smoothed model share a feature; each
    feature is seeded with the previous segment's endpoint so the rendered
    line is continuous.  Coordinates follow the GeoJSON order (lon, lat).
    """
    features: list[dict] = []
    coords: list[list[float]] = []
    current: int | None = None
    for row in rows:
        point = [row.longitude_deg, row.latitude_deg]
        if current is None:
            current, coords = row.model, [point]
        elif row.model != current:
            features.append(_segment_feature(current, coords))
            current, coords = row.model, [coords[-1], point]
        else:
            coords.append(point)
    if current is not None:
        features.append(_segment_feature(current, coords))
    return {"type": "FeatureCollection", "features": features}


def _segment_feature(model: int, coords: list[list[float]]) -> dict:
    if len(coords) == 1:                # a LineString needs two positions
        coords = [coords[0], coords[0]]
    return {
        "type": "Feature",
        "properties": {"model": model, "color": MODEL_COLORS[model]},
        "geometry": {"type": "LineString", "coordinates": coords},
    }


def write_geojson(rows: Iterable[TrajectoryRow], path: str | Path) -> None:
    text = json.dumps(trajectory_geojson(rows), sort_keys=True,
                      separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="ascii")


def report_to_json(report: RunReport) -> str:
    """Serialize a report (inverse of :func:`report_from_json`)."""
    payload = {
        "mode": report.mode,
        "rms_innovation_m": report.rms_innovation_m,
        "max_innovation_m": report.max_innovation_m,
        "occupancy": list(report.occupancy),
        "cycles": report.cycles,
        "wall_time_s": report.wall_time_s,
        "segment_rms": list(report.segment_rms),
        "input_digest": report.input_digest,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_from_json(text: str) -> RunReport:
    try:
        payload = json.loads(text)
        return RunReport(
            mode=payload["mode"],
            rms_innovation_m=float(payload["rms_innovation_m"]),
            max_innovation_m=float(payload["max_innovation_m"]),
            occupancy=tuple(float(v) for v in payload["occupancy"]),
            cycles=int(payload["cycles"]),
            wall_time_s=float(payload["wall_time_s"]),
            segment_rms=tuple(float(v) for v in payload["segment_rms"]),
            input_digest=str(payload["input_digest"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
        raise ReplayError(f"malformed report: {err}") from err
