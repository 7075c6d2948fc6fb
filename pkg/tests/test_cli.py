import json
from pathlib import Path

import pytest

from dfafusion import cli
from dfafusion.kalman import CovarianceViolation, StaleFix


def run_cli(*argv: str) -> int:
    return cli.main(list(argv))


def simulate_dir(tmp_path: Path, *, seed: int = 1, profile: str = "stationary",
                 duration: float = 20.0) -> Path:
    out = tmp_path / f"{profile}-{seed}"
    code = run_cli("simulate", "--profile", profile, "--duration",
                   str(duration), "--seed", str(seed), "--out-dir", str(out))
    assert code == 0
    return out


def test_simulate_writes_three_logs(tmp_path, capsys):
    out = simulate_dir(tmp_path)
    assert (out / "gps.nmea").exists()
    assert (out / "imu.csv").exists()
    assert (out / "truth.csv").exists()
    assert "wrote" in capsys.readouterr().out


def test_simulate_deterministic_across_invocations(tmp_path):
    first = simulate_dir(tmp_path / "a")
    second = simulate_dir(tmp_path / "b")
    for name in ("gps.nmea", "imu.csv", "truth.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_fuse_writes_outputs_and_report(tmp_path, capsys):
    logs = simulate_dir(tmp_path)
    capsys.readouterr()  # drop the simulate summary line
    outs = {flag: tmp_path / name for flag, name in [
        ("--out-traj", "traj.csv"), ("--out-err", "err.csv"),
        ("--out-models", "models.csv"), ("--out-geojson", "run.geojson"),
        ("--out-report", "report.json")]}
    argv = ["fuse", "--gps", str(logs / "gps.nmea"),
            "--imu", str(logs / "imu.csv"), "--mode", "dfa"]
    for flag, path in outs.items():
        argv += [flag, str(path)]
    assert run_cli(*argv) == 0
    for path in outs.values():
        assert path.exists() and path.stat().st_size > 0
    stdout_report = json.loads(capsys.readouterr().out)
    file_report = json.loads(outs["--out-report"].read_text())
    assert stdout_report == file_report
    assert stdout_report["mode"] == "dfa"
    assert stdout_report["cycles"] > 0


def test_fuse_then_compare_flow(tmp_path, capsys):
    logs = simulate_dir(tmp_path)
    report_a = tmp_path / "dfa.json"
    report_b = tmp_path / "static.json"
    for mode, path in (("dfa", report_a), ("static", report_b)):
        assert run_cli("fuse", "--gps", str(logs / "gps.nmea"),
                       "--imu", str(logs / "imu.csv"), "--mode", mode,
                       "--out-report", str(path)) == 0
    capsys.readouterr()
    assert run_cli("compare", "--a", str(report_a), "--b", str(report_b)) == 0
    out = capsys.readouterr().out
    assert "improvement" in out and "segment winners" in out


def test_fuse_with_config_file(tmp_path):
    logs = simulate_dir(tmp_path)
    config = tmp_path / "filter.cfg"
    config.write_text("sigma_gps_m=2.5\nsigma_accel=0.5\nthresholds=7.5,15.0\n")
    assert run_cli("fuse", "--gps", str(logs / "gps.nmea"),
                   "--imu", str(logs / "imu.csv"), "--config", str(config)) == 0


def test_missing_input_file_exits_1(tmp_path, capsys):
    assert run_cli("fuse", "--gps", str(tmp_path / "nope.nmea"),
                   "--imu", str(tmp_path / "nope.csv")) == 1
    assert "error" in capsys.readouterr().err


def test_corrupt_gps_log_exits_1(tmp_path, capsys):
    logs = simulate_dir(tmp_path)
    gps = logs / "gps.nmea"
    gps.write_text(gps.read_text().replace("$", "?", 1))
    assert run_cli("fuse", "--gps", str(gps),
                   "--imu", str(logs / "imu.csv")) == 1
    assert "gps.nmea:1" in capsys.readouterr().err


def test_gps_outage_beyond_horizon_exits_1(tmp_path, capsys):
    logs = simulate_dir(tmp_path, duration=20.0)
    gps = logs / "gps.nmea"
    lines = gps.read_text().splitlines()
    gps.write_text("\n".join(lines[:3] + lines[15:]) + "\n")  # 12 s hole
    assert run_cli("fuse", "--gps", str(gps),
                   "--imu", str(logs / "imu.csv")) == 1
    assert "old" in capsys.readouterr().err


def test_numerical_failure_exits_2(tmp_path, capsys, monkeypatch):
    logs = simulate_dir(tmp_path)

    def explode(*args, **kwargs):
        raise CovarianceViolation("covariance asymmetry 1.0e-02 >= 1e-09")

    monkeypatch.setattr(cli, "run_fusion", explode)
    assert run_cli("fuse", "--gps", str(logs / "gps.nmea"),
                   "--imu", str(logs / "imu.csv")) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_compare_mismatched_reports_exits_1(tmp_path, capsys):
    logs_a = simulate_dir(tmp_path, seed=1)
    logs_b = simulate_dir(tmp_path, seed=2)
    reports = []
    for logs in (logs_a, logs_b):
        path = logs / "report.json"
        assert run_cli("fuse", "--gps", str(logs / "gps.nmea"),
                       "--imu", str(logs / "imu.csv"),
                       "--out-report", str(path)) == 0
        reports.append(path)
    assert run_cli("compare", "--a", str(reports[0]),
                   "--b", str(reports[1])) == 1
    assert "different input logs" in capsys.readouterr().err


def test_usage_errors_exit_1():
    assert run_cli("no-such-verb") == 1
    assert run_cli("fuse") == 1          # missing required flags
    assert run_cli() == 1                # missing subcommand


def test_help_exits_0(capsys):
    assert run_cli("--help") == 0
    assert "simulate" in capsys.readouterr().out


def test_malformed_report_file_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("compare", "--a", str(bad), "--b", str(bad)) == 1
    assert "malformed report" in capsys.readouterr().err


def test_serve_threads_flags_into_app(monkeypatch):
    captured = {}

    def fake_create_app(**kwargs):
        captured.update(kwargs)
        return "app"

    monkeypatch.setattr("dfafusion.server.create_app", fake_create_app)
    monkeypatch.setattr("uvicorn.run", lambda app, **kw: captured.update(port=kw["port"]))
    assert run_cli("serve", "--port", "9000", "--seed", "3", "--items", "4",
                   "--arena-radius", "50", "--turbo") == 0
    assert captured["seed"] == 3
    assert captured["item_count"] == 4
    assert captured["arena_radius_m"] == 50.0
    assert captured["turbo"] is True
    assert captured["port"] == 9000
