"""NMEA 0183 ingestion: framing, checksum verification, and GGA fix extraction.

Only GGA sentences produce fixes — they carry position, altitude, quality,
and satellite count, which is everything the fusion pipeline consumes.
Other sentence types parse fine at the framing layer and are then skipped.

Error handling is split by layer so a corrupted corpus can be diagnosed
precisely: framing problems (:class:`MissingStart`, :class:`NonAsciiByte`,
:class:`Truncated`, :class:`BadChecksum`) versus field problems
(:class:`FieldCount`, :class:`BadNumber`, :class:`InvalidFixQuality`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from operator import xor
from typing import Iterable, Iterator

from dfafusion.geodesy import GeodeticPosition


class NmeaError(ValueError):
    """Base class for all sentence rejection reasons."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class MissingStart(NmeaError):
    """Line is empty or does not begin with '$'."""


class NonAsciiByte(NmeaError):
    """Line contains bytes outside the ASCII range."""


class Truncated(NmeaError):
    """Checksum delimiter/digits missing, or the payload is structurally short."""


class BadChecksum(NmeaError):
    """Claimed checksum does not match the XOR of the payload bytes."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"checksum mismatch: payload XORs to {expected:02X}, line claims {actual:02X}")
        self.expected = expected
        self.actual = actual


class FieldCount(NmeaError):
    """Sentence has too few fields for its type."""


class BadNumber(NmeaError):
    """A field failed numeric/format validation."""

    def __init__(self, field_index: int, message: str):
        super().__init__(f"field {field_index}: {message}")
        self.field_index = field_index


class InvalidFixQuality(NmeaError):
    """Fix-quality indicator outside the supported set {0, 1, 2}."""


class FixQuality(Enum):
    INVALID = 0
    GPS = 1
    DGPS = 2


@dataclass(frozen=True, slots=True)
class NmeaSentence:
    """A checksum-verified sentence split into its comma-separated fields."""

    talker_type: str            # 5-char identifier, e.g. "GPGGA"
    fields: tuple[str, ...]     # payload fields after the identifier
    checksum: int               # verified XOR value
    raw_line: str

    @property
    def sentence_type(self) -> str:
        return self.talker_type[2:]


@dataclass(frozen=True, slots=True)
class GpsFix:
    """A usable GPS fix: quality is never INVALID, satellite count >= 0."""

    timestamp: float            # seconds, fractional (time-of-day + caller's base)
    position: GeodeticPosition
    fix_quality: FixQuality
    num_satellites: int
    hdop: float


@dataclass
class StreamTally:
    """Per-stream ingestion accounting, filled in by :func:`stream_fixes`."""

    lines: int = 0
    fixes: int = 0
    skipped: int = 0            # valid sentences that yield no fix
    errors: int = 0
    by_kind: dict[str, int] = field(default_factory=dict)


def payload_checksum(payload: str) -> int:
    """XOR of all payload bytes (the text between '$' and '*')."""
    return reduce(xor, payload.encode("ascii"), 0)


def parse_sentence(line: str) -> NmeaSentence:
    """Frame and checksum-validate one sentence; raises an NmeaError subclass."""
    if not line or line[0] != "$":
        raise MissingStart(f"no leading '$' in {line!r}")
    if not line.isascii():
        raise NonAsciiByte(f"non-ASCII byte in {line!r}")
    star = line.rfind("*")
    if star < 0:
        raise Truncated("no checksum delimiter '*'")
    payload, claimed = line[1:star], line[star + 1:]
    if len(claimed) != 2 or not all(c in "0123456789ABCDEFabcdef" for c in claimed):
        raise Truncated(f"checksum digits {claimed!r} are not two hex characters")
    expected = payload_checksum(payload)
    actual = int(claimed, 16)
    if expected != actual:
        raise BadChecksum(expected, actual)
    parts = payload.split(",")
    talker_type = parts[0]
    if len(talker_type) != 5 or not talker_type.isalnum():
        raise Truncated(f"identifier {talker_type!r} is not five alphanumeric characters")
    return NmeaSentence(talker_type=talker_type, fields=tuple(parts[1:]),
                        checksum=actual, raw_line=line)


def _parse_int(fields: tuple[str, ...], idx: int, what: str) -> int:
    try:
        return int(fields[idx])
    except ValueError:
        raise BadNumber(idx, f"{what} {fields[idx]!r} is not an integer") from None


def _parse_float(fields: tuple[str, ...], idx: int, what: str) -> float:
    try:
        value = float(fields[idx])
    except ValueError:
        raise BadNumber(idx, f"{what} {fields[idx]!r} is not a number") from None
    if not math.isfinite(value):
        raise BadNumber(idx, f"{what} {fields[idx]!r} is not finite")
    return value


def _parse_time_of_day(fields: tuple[str, ...], idx: int) -> float:
    text = fields[idx]
    head, _, frac = text.partition(".")
    if len(head) != 6 or not head.isdigit() or (frac and not frac.isdigit()):
        raise BadNumber(idx, f"time {text!r} is not hhmmss[.sss]")
    hh, mm, ss = int(head[0:2]), int(head[2:4]), int(head[4:6])
    if hh > 23 or mm > 59 or ss > 59:
        raise BadNumber(idx, f"time {text!r} out of range")
    return hh * 3600.0 + mm * 60.0 + ss + (float(f"0.{frac}") if frac else 0.0)


def _parse_angle(fields: tuple[str, ...], value_idx: int, hemi_idx: int,
                 positive: str, negative: str, limit: float) -> float:
    """Convert ddmm.mmmm (or dddmm.mmmm) plus hemisphere letter to signed degrees."""
    raw = _parse_float(fields, value_idx, "angle")
    if raw < 0.0:
        raise BadNumber(value_idx, f"angle {raw} must be unsigned; sign comes from hemisphere")
    degrees = math.floor(raw / 100.0)
    minutes = raw - 100.0 * degrees
    if minutes >= 60.0:
        raise BadNumber(value_idx, f"minutes {minutes:.4f} >= 60")
    decimal = degrees + minutes / 60.0
    hemi = fields[hemi_idx]
    if hemi == positive:
        signed = decimal
    elif hemi == negative:
        signed = -decimal
    else:
        raise BadNumber(hemi_idx, f"hemisphere {hemi!r} not one of {positive!r}/{negative!r}")
    if abs(signed) > limit:
        raise BadNumber(value_idx, f"angle {signed} exceeds {limit} degrees")
    return signed


def format_angle(decimal_deg: float, positive: str, negative: str,
                 degree_digits: int) -> tuple[str, str]:
    """Inverse of :func:`_parse_angle`: degrees to (ddmm.mmmmmm, hemisphere).

    Six decimal places on the minutes keep the round trip within 1e-7 degrees.
    """
    hemi = positive if decimal_deg >= 0.0 else negative
    magnitude = abs(decimal_deg)
    degrees = math.floor(magnitude)
    minutes = round((magnitude - degrees) * 60.0, 6)
    if minutes >= 60.0:        # rounding carried into the next degree
        degrees += 1
        minutes = 0.0
    return f"{degrees:0{degree_digits}d}{minutes:09.6f}", hemi


# GGA payload layout (0-based indices into NmeaSentence.fields).
_GGA_TIME, _GGA_LAT, _GGA_NS, _GGA_LON, _GGA_EW = 0, 1, 2, 3, 4
_GGA_QUALITY, _GGA_NUM_SATS, _GGA_HDOP, _GGA_ALT, _GGA_ALT_UNIT = 5, 6, 7, 8, 9
_GGA_MIN_FIELDS = 10
MIN_SATELLITES = 4  # a 3D position fix is not solvable below four satellites


def sentence_to_fix(s: NmeaSentence, *, base_time: float = 0.0) -> GpsFix | None:
    """Extract a GpsFix from a GGA sentence; None means "valid but no fix here".

    Skips: non-GGA types, quality 0 (receiver reports no fix — position fields
    are typically blank, so quality is checked before any of them), and fixes
    seen by fewer than MIN_SATELLITES satellites.
    """
    if s.sentence_type != "GGA":
        return None
    if len(s.fields) < _GGA_MIN_FIELDS:
        raise FieldCount(f"GGA needs >= {_GGA_MIN_FIELDS} fields, got {len(s.fields)}")
    quality_code = _parse_int(s.fields, _GGA_QUALITY, "fix quality")
    if quality_code == FixQuality.INVALID.value:
        return None
    try:
        quality = FixQuality(quality_code)
    except ValueError:
        raise InvalidFixQuality(f"quality indicator {quality_code} unsupported") from None
    num_satellites = _parse_int(s.fields, _GGA_NUM_SATS, "satellite count")
    if num_satellites < 0:
        raise BadNumber(_GGA_NUM_SATS, f"satellite count {num_satellites} negative")
    if num_satellites < MIN_SATELLITES:
        return None
    timestamp = base_time + _parse_time_of_day(s.fields, _GGA_TIME)
    latitude = _parse_angle(s.fields, _GGA_LAT, _GGA_NS, "N", "S", 90.0)
    longitude = _parse_angle(s.fields, _GGA_LON, _GGA_EW, "E", "W", 180.0)
    hdop = _parse_float(s.fields, _GGA_HDOP, "HDOP")
    altitude = _parse_float(s.fields, _GGA_ALT, "altitude")
    return GpsFix(
        timestamp=timestamp,
        position=GeodeticPosition(latitude, longitude, altitude),
        fix_quality=quality,
        num_satellites=num_satellites,
        hdop=hdop,
    )


def stream_fixes(lines: Iterable[str], *, base_time: float = 0.0,
                 tally: StreamTally | None = None) -> Iterator[GpsFix]:
    """Lazily yield fixes from a line stream; never aborts on bad lines.

    Rejected lines are counted in ``tally`` (if given) by error kind; sentences
    that are valid but fix-free (non-GGA, no-fix quality, too few satellites)
    count as skipped.  Order of emitted fixes matches input order.
    """
    for raw in lines:
        line = raw.rstrip("\r\n")
        if tally is not None:
            tally.lines += 1
        try:
            fix = sentence_to_fix(parse_sentence(line), base_time=base_time)
        except NmeaError as err:
            if tally is not None:
                tally.errors += 1
                tally.by_kind[err.kind] = tally.by_kind.get(err.kind, 0) + 1
            continue
        if fix is None:
            if tally is not None:
                tally.skipped += 1
            continue
        if tally is not None:
            tally.fixes += 1
        yield fix


def make_gga_line(time_of_day_s: float, position: GeodeticPosition, *,
                  quality: FixQuality = FixQuality.GPS, num_satellites: int = 8,
                  hdop: float = 0.9) -> str:
    """Render a checksummed GGA sentence (the simulator's emission path)."""
    hh, rem = divmod(time_of_day_s, 3600.0)
    mm, ss = divmod(rem, 60.0)
    time_text = f"{int(hh):02d}{int(mm):02d}{ss:05.2f}"
    lat_text, ns = format_angle(position.latitude_deg, "N", "S", 2)
    lon_text, ew = format_angle(position.longitude_deg, "E", "W", 3)
    payload = (
        f"GPGGA,{time_text},{lat_text},{ns},{lon_text},{ew},{quality.value},"
        f"{num_satellites:02d},{hdop:.1f},{position.altitude_m:.3f},M,0.0,M,,"
    )
    return f"${payload}*{payload_checksum(payload):02X}"
