"""Fusion configuration: noise model, cadences, selector tuning.

Configs load from a plain ``key=value`` text format (one pair per line,
``#`` comments allowed) so replay runs are reproducible from a single file::

    sigma_gps_m=2.5
    sigma_accel=0.5
    thresholds=3.0,7.5
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path


@dataclass(frozen=True)
class NoiseConfig:
    """Filter noise intensities and initial uncertainty, all strictly positive.

    sigma_gps_m: GPS position measurement std per ECEF axis.
    sigma_accel: white-noise acceleration intensity driving process noise.
    p0_pos_m / p0_vel: initial position/velocity std.
    """

    sigma_gps_m: float = 2.5
    sigma_accel: float = 0.5
    p0_pos_m: float = 10.0
    p0_vel: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sigma_gps_m", "sigma_accel", "p0_pos_m", "p0_vel"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name}={value} must be finite and > 0")


@dataclass(frozen=True)
class FusionConfig:
    """Everything the pipeline needs: noise, batch cadence, selector tuning."""

    noise: NoiseConfig = field(default_factory=NoiseConfig)
    batch_size: int = 4
    imu_dt_s: float = 0.020
    stale_fix_horizon_s: float = 5.0
    window_len: int = 5
    thresholds: tuple[float, float] = (3.0, 7.5)

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size={self.batch_size} must be >= 1")
        if not (math.isfinite(self.imu_dt_s) and self.imu_dt_s > 0.0):
            raise ValueError(f"imu_dt_s={self.imu_dt_s} must be finite and > 0")
        if self.stale_fix_horizon_s <= 0.0:
            raise ValueError("stale_fix_horizon_s must be > 0")
        if self.window_len < 1:
            raise ValueError(f"window_len={self.window_len} must be >= 1")
        low, high = self.thresholds
        if not (0.0 < low < high):
            raise ValueError(f"thresholds {self.thresholds} need 0 < low < high")

    @property
    def batch_duration_s(self) -> float:
        return self.batch_size * self.imu_dt_s


_NOISE_KEYS = {"sigma_gps_m", "sigma_accel", "p0_pos_m", "p0_vel"}
_INT_KEYS = {"batch_size", "window_len"}
_FLOAT_KEYS = {"imu_dt_s", "stale_fix_horizon_s"}


def parse_config(text: str) -> FusionConfig:
    """Parse key=value config text; unknown keys and bad values raise ValueError."""
    noise_kwargs: dict[str, float] = {}
    fusion_kwargs: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key or not value:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        try:
            if key in _NOISE_KEYS:
                noise_kwargs[key] = float(value)
            elif key in _INT_KEYS:
                fusion_kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                fusion_kwargs[key] = float(value)
            elif key == "thresholds":
                low, high = (float(p) for p in value.split(","))
                fusion_kwargs["thresholds"] = (low, high)
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        except ValueError as err:
            if "unknown key" in str(err):
                raise
            raise ValueError(f"line {lineno}: bad value for {key}: {value!r}") from None
    return FusionConfig(noise=NoiseConfig(**noise_kwargs), **fusion_kwargs)


def load_config(path: str | Path) -> FusionConfig:
    return parse_config(Path(path).read_text(encoding="ascii"))


def format_config(cfg: FusionConfig) -> str:
    """Render a config back to the key=value format (inverse of parse_config)."""
    n = cfg.noise
    low, high = cfg.thresholds
    return "\n".join([
        f"sigma_gps_m={n.sigma_gps_m!r}",
        f"sigma_accel={n.sigma_accel!r}",
        f"p0_pos_m={n.p0_pos_m!r}",
        f"p0_vel={n.p0_vel!r}",
        f"batch_size={cfg.batch_size}",
        f"imu_dt_s={cfg.imu_dt_s!r}",
        f"stale_fix_horizon_s={cfg.stale_fix_horizon_s!r}",
        f"window_len={cfg.window_len}",
        f"thresholds={low!r},{high!r}",
    ]) + "\n"


def with_noise(cfg: FusionConfig, **noise_overrides: float) -> FusionConfig:
    """Convenience: copy of cfg with some NoiseConfig fields replaced."""
    return replace(cfg, noise=replace(cfg.noise, **noise_overrides))
