"""GPS/IMU fusion with automaton-driven motion-model switching.

Layers, bottom up:

- :mod:`dfafusion.geodesy` -- WGS84 conversions and local ENU frames.
- :mod:`dfafusion.nmea` -- NMEA 0183 GGA sentence ingestion.
- :mod:`dfafusion.deadreckon` -- short-horizon IMU displacement integration.
- :mod:`dfafusion.kalman` -- the six-state filter and fusion pipeline.
- :mod:`dfafusion.selector` -- innovation-driven motion-model automaton.
- :mod:`dfafusion.simulate` -- seeded sensor-stream synthesis.
- :mod:`dfafusion.replay` -- offline replay, metrics, comparison reports.
- :mod:`dfafusion.game` / :mod:`dfafusion.server` -- item-collection demo
  built on the live pipeline, served over WebSocket.
"""

from dfafusion.geodesy import (
    EcefPosition,
    EnuPosition,
    GeodeticPosition,
    WGS84_A,
    WGS84_E2,
    ecef_to_enu,
    enu_to_ecef,
    geodetic_to_ecef,
    prime_vertical_radius,
)

__all__ = [
    "EcefPosition",
    "EnuPosition",
    "GeodeticPosition",
    "WGS84_A",
    "WGS84_E2",
    "ecef_to_enu",
    "enu_to_ecef",
    "geodetic_to_ecef",
    "prime_vertical_radius",
]

__version__ = "0.1.0"
