"""WebSocket game service: one connection, one isolated session.

Speaks a line-of-JSON protocol.  Client frames: ``start`` (seed a new
session), ``input`` (steering acceleration), ``reset`` (restart with the
same seed).  Server frames: ``tick`` (full game state each cycle), ``hit``
(one per pickup, for the UI's sound cue and score delta), ``end`` (arena
cleared), ``error`` (bad frame; the session keeps running).

Two pacing modes: real-time (a background ticker advances the game at the
filter cadence regardless of input rate) and turbo (lock-step: each
``input`` frame advances exactly one tick) for deterministic scripted
clients and tests.  If a built browser client is present on disk it is
served on the HTTP side of the same port.
"""

from __future__ import annotations

import asyncio
import math
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import FusionConfig
from .game import (
    ARENA_RADIUS_M,
    GameRunner,
    GameSession,
    PipelineStalled,
    SessionTick,
    place_items,
)
from .kalman import FusionPipeline, FusionError
from .simulate import LiveSimulator, SimConfig

FRONTEND_DIST = Path(__file__).resolve().parents[2] / "frontend" / "dist"


def tick_message(tick: SessionTick, session: GameSession) -> dict:
    return {
        "type": "tick",
        "t": tick.t,
        "fused": [tick.fused[0], tick.fused[1]],
        "truth": [tick.truth[0], tick.truth[1]],
        "model": tick.model,
        "score": tick.score,
        "elapsed": tick.elapsed,
        "items": [
            {"id": item.id, "kind": item.kind,
             "pos": [item.east_m, item.north_m], "collected": item.collected}
            for item in session.items
        ],
    }


class Connection:
    """Per-socket game state; nothing here is shared between connections."""

    def __init__(self, *, fusion_config: FusionConfig, arena_radius_m: float,
                 item_count: int, gps_sigma_m: float, accel_sigma: float):
        self.fusion_config = fusion_config
        self.arena_radius_m = arena_radius_m
        self.item_count = item_count
        self.gps_sigma_m = gps_sigma_m
        self.accel_sigma = accel_sigma
        self.runner: GameRunner | None = None
        self.seed: int | None = None
        self.command = (0.0, 0.0)
        self.ended = False

    def start(self, seed: int) -> None:
        """(Re)build simulator, filter, and session from one seed."""
        simulator = LiveSimulator(SimConfig(
            seed=seed, duration_s=86_399.0, gps_sigma_m=self.gps_sigma_m,
            accel_sigma=self.accel_sigma))
        session = GameSession(items=place_items(
            seed, self.item_count, arena_radius_m=self.arena_radius_m))
        self.runner = GameRunner(session, FusionPipeline(self.fusion_config),
                                 simulator)
        self.seed = seed
        self.command = (0.0, 0.0)
        self.ended = False

    def first_tick(self) -> SessionTick:
        """Advance past filter initialization to the first real tick."""
        assert self.runner is not None
        for _ in range(3):
            tick = self.runner.tick(*self.command)
            if tick is not None:
                return tick
        raise RuntimeError("filter failed to initialize")  # pragma: no cover

    def frames_for(self, tick: SessionTick) -> list[dict]:
        """Wire frames describing one tick: state, pickups, maybe the end."""
        assert self.runner is not None
        frames = [tick_message(tick, self.runner.session)]
        frames += [{"type": "hit", "id": event.item_id, "points": event.points}
                   for event in tick.hits]
        if self.runner.session.all_collected and not self.ended:
            self.ended = True
            frames.append({"type": "end", "score": tick.score,
                           "elapsed": tick.elapsed})
        return frames


def _steering(payload: dict) -> tuple[float, float]:
    try:
        ax, ay = payload["ax"], payload["ay"]
    except KeyError as err:
        raise ValueError(f"input frame missing {err.args[0]!r}") from None
    if isinstance(ax, bool) or isinstance(ay, bool) or \
            not isinstance(ax, (int, float)) or not isinstance(ay, (int, float)):
        raise ValueError("ax and ay must be numbers")
    if not (math.isfinite(ax) and math.isfinite(ay)):
        raise ValueError("ax and ay must be finite")
    return float(ax), float(ay)


def create_app(*, fusion_config: FusionConfig | None = None,
               arena_radius_m: float = ARENA_RADIUS_M,
               seed: int = 0,
               item_count: int = 10,
               gps_sigma_m: float = 2.5,
               accel_sigma: float = 0.05,
               turbo: bool = False,
               tick_period_s: float = 0.08,
               static_dir: Path | None = FRONTEND_DIST) -> FastAPI:
    """Build the service; ``turbo`` switches to lock-step pacing for tests."""
    app = FastAPI(title="dfafusion game service")
    defaults = dict(fusion_config=fusion_config or FusionConfig(),
                    arena_radius_m=arena_radius_m, item_count=item_count,
                    gps_sigma_m=gps_sigma_m, accel_sigma=accel_sigma)
    default_seed = seed

    @app.websocket("/ws")
    async def websocket_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        conn = Connection(**defaults)
        ticker: asyncio.Task | None = None

        async def run_ticker() -> None:
            """Real-time pacing: advance the game while inputs trickle in."""
            try:
                while not conn.ended:
                    await asyncio.sleep(tick_period_s)
                    assert conn.runner is not None
                    tick = conn.runner.tick(*conn.command)
                    if tick is None:
                        continue
                    for frame in conn.frames_for(tick):
                        await ws.send_json(frame)
            except (WebSocketDisconnect, RuntimeError):
                pass                      # socket gone; nothing to clean up

        async def stop_ticker() -> None:
            nonlocal ticker
            if ticker is not None:
                ticker.cancel()
                try:
                    await ticker
                except asyncio.CancelledError:
                    pass
                ticker = None

        try:
            while True:
                try:
                    payload = await ws.receive_json()
                except WebSocketDisconnect:
                    break
                except (ValueError, TypeError):
                    await ws.send_json({"type": "error",
                                        "message": "frames must be JSON objects"})
                    continue
                try:
                    frames = await handle(conn, payload)
                except (ValueError, FusionError, PipelineStalled) as err:
                    await ws.send_json({"type": "error", "message": str(err)})
                    continue
                for frame in frames:
                    await ws.send_json(frame)
                if isinstance(payload, dict) and not turbo and \
                        payload.get("type") in ("start", "reset"):
                    await stop_ticker()
                    ticker = asyncio.create_task(run_ticker())
        finally:
            await stop_ticker()

    async def handle(conn: Connection, payload: object) -> list[dict]:
        if not isinstance(payload, dict) or "type" not in payload:
            raise ValueError("frames must be objects with a 'type' field")
        kind = payload["type"]
        if kind == "start":
            raw_seed = payload.get("seed", default_seed)
            if isinstance(raw_seed, bool) or not isinstance(raw_seed, int):
                raise ValueError("seed must be an integer")
            conn.start(raw_seed)
            return conn.frames_for(conn.first_tick())
        if kind == "reset":
            if conn.seed is None:
                raise ValueError("no session to reset; send start first")
            conn.start(conn.seed)
            return conn.frames_for(conn.first_tick())
        if kind == "input":
            if conn.runner is None:
                raise ValueError("no active session; send start first")
            conn.command = _steering(payload)
            if conn.ended:
                raise ValueError("session over; send reset or start")
            if turbo:
                tick = conn.runner.tick(*conn.command)
                return conn.frames_for(tick) if tick is not None else []
            return []
        raise ValueError(f"unknown frame type {kind!r}")

    if static_dir is not None and static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="frontend")
    return app
