"""Command-line front end: simulate sensor logs, fuse them, compare runs, serve the game.

Exit codes: 0 on success, 1 for input problems (unreadable or malformed
files, bad flags, data gaps), 2 for numerical failures inside the filter
(covariance violations, singular innovation covariance).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import FusionConfig, load_config
from .kalman import CovarianceViolation, FusionError, SingularInnovationCovariance
from .nmea import NmeaError
from .replay import (
    ReplayError,
    compare,
    render_comparison,
    report_from_json,
    report_to_json,
    run_fusion,
    write_geojson,
    write_innovation_csv,
    write_models_csv,
    write_trajectory_csv,
)
from .simulate import PROFILES, SimConfig, emit_streams, named_profile

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfafusion",
        description="GPS/IMU fusion with automaton-driven motion models.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate GPS/IMU/truth logs")
    sim.add_argument("--profile", required=True, choices=sorted(PROFILES),
                     help="motion profile to simulate")
    sim.add_argument("--duration", type=float, required=True, metavar="S",
                     help="simulated seconds")
    sim.add_argument("--seed", type=int, required=True,
                     help="noise generator seed")
    sim.add_argument("--out-dir", required=True, metavar="DIR",
                     help="directory for gps.nmea, imu.csv, truth.csv")
    sim.add_argument("--gps-sigma-m", type=float, default=None,
                     help="GPS noise sigma in meters (default: config default)")
    sim.add_argument("--accel-sigma", type=float, default=None,
                     help="IMU noise sigma in m/s^2 (default: config default)")
    sim.add_argument("--gps-period-s", type=float, default=None,
                     help="seconds between fixes (default: 1.0)")
    sim.set_defaults(func=cmd_simulate)

    fuse = sub.add_parser("fuse", help="replay logs through the filter")
    fuse.add_argument("--gps", required=True, metavar="FILE",
                      help="NMEA GGA log")
    fuse.add_argument("--imu", required=True, metavar="FILE",
                      help="IMU CSV log (t,ax,ay,az)")
    fuse.add_argument("--config", metavar="FILE",
                      help="key=value filter configuration")
    fuse.add_argument("--mode", choices=("static", "dfa"), default="dfa",
                      help="pin the model at P1 or let the automaton drive")
    fuse.add_argument("--out-traj", metavar="FILE",
                      help="trajectory CSV (t, lat, lon, alt, model)")
    fuse.add_argument("--out-err", metavar="FILE",
                      help="innovation series CSV")
    fuse.add_argument("--out-models", metavar="FILE",
                      help="model trace CSV")
    fuse.add_argument("--out-geojson", metavar="FILE",
                      help="model-colored LineString for map display")
    fuse.add_argument("--out-report", metavar="FILE",
                      help="run report JSON (also printed to stdout)")
    fuse.set_defaults(func=cmd_fuse)

    comp = sub.add_parser("compare", help="compare two fuse reports")
    comp.add_argument("--a", required=True, metavar="REPORT",
                      help="report JSON of run A")
    comp.add_argument("--b", required=True, metavar="REPORT",
                      help="report JSON of run B (the baseline)")
    comp.set_defaults(func=cmd_compare)

    serve = sub.add_parser("serve", help="run the treasure-hunt game service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--arena-radius", type=float, default=100.0,
                       metavar="M", help="item placement radius in meters")
    serve.add_argument("--seed", type=int, default=0,
                       help="item placement seed")
    serve.add_argument("--items", type=int, default=10,
                       help="number of items to place (default 10)")
    serve.add_argument("--turbo", action="store_true",
                       help="lock-step mode: one tick per input frame, for scripted clients")
    serve.add_argument("--config", metavar="FILE",
                       help="key=value filter configuration")
    serve.set_defaults(func=cmd_serve)
    return parser


def cmd_simulate(args: argparse.Namespace) -> int:
    overrides = {}
    if args.gps_sigma_m is not None:
        overrides["gps_sigma_m"] = args.gps_sigma_m
    if args.accel_sigma is not None:
        overrides["accel_sigma"] = args.accel_sigma
    if args.gps_period_s is not None:
        overrides["gps_period_s"] = args.gps_period_s
    cfg = SimConfig(seed=args.seed, duration_s=args.duration, **overrides)
    streams = emit_streams(named_profile(args.profile), cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "gps.nmea").write_text(streams.gga_text(), encoding="ascii")
    (out_dir / "imu.csv").write_text(streams.imu_text(), encoding="ascii")
    (out_dir / "truth.csv").write_text(streams.truth_text(), encoding="ascii")
    print(f"wrote {len(streams.gga_lines)} fixes, {len(streams.imu_lines) - 1} "
          f"IMU samples to {out_dir}")
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else FusionConfig()
    run = run_fusion(args.gps, args.imu, config=config, mode=args.mode)
    if args.out_traj:
        write_trajectory_csv(run.trajectory, args.out_traj)
    if args.out_err:
        write_innovation_csv(run.innovations, args.out_err)
    if args.out_models:
        write_models_csv(run.models, args.out_models)
    if args.out_geojson:
        write_geojson(run.trajectory, args.out_geojson)
    report_text = report_to_json(run.report)
    if args.out_report:
        Path(args.out_report).write_text(report_text, encoding="ascii")
    sys.stdout.write(report_text)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    report_a = report_from_json(Path(args.a).read_text(encoding="ascii"))
    report_b = report_from_json(Path(args.b).read_text(encoding="ascii"))
    sys.stdout.write(render_comparison(compare(report_a, report_b)))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    config = load_config(args.config) if args.config else FusionConfig()
    app = create_app(fusion_config=config, arena_radius_m=args.arena_radius,
                     seed=args.seed, item_count=args.items, turbo=args.turbo)
    uvicorn.run(app, host="127.0.0.1", port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:       # argparse exits 2 on usage errors
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except (CovarianceViolation, SingularInnovationCovariance) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FusionError, ReplayError, NmeaError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":          # pragma: no cover - exercised via script
    sys.exit(main())
