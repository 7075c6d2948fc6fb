"""Treasure-hunt game: item placement, proximity hits, time-decayed scoring.

A session owns a set of items scattered on the local tangent plane.  Each
filter cycle the fused position estimate is checked against the uncollected
items; anything strictly inside the hit radius is collected and scored with
a value that decays the longer the session has been running.  The game loop
composes the live steerable simulator, the fusion pipeline, and the session
into a tick stream a UI (or a headless test) can consume.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple

from .geodesy import EcefPosition, ecef_to_enu
from .kalman import FusionPipeline
from .simulate import LiveSimulator

KIND_SCORES = {"small_coin": 10, "large_coin": 30, "chest": 50}
DECAY_CONSTANT_S = 5.0
HIT_THRESHOLD_M = 2.0
ACCEL_CAP_MPS2 = 2.0            # steering commands are clamped to this magnitude
ARENA_RADIUS_M = 100.0
MIN_SPACING_M = 10.0
TICK_BUDGET_S = 0.045           # 22 ticks per second
STALL_FACTOR = 10.0


class PipelineStalled(RuntimeError):
    """A single game tick took more than ``STALL_FACTOR`` times its budget."""


def decayed_score(initial_score: int, elapsed: float,
                  c: float = DECAY_CONSTANT_S) -> int:
    """Points awarded for a pickup ``elapsed`` seconds into the session.

    The award is ``initial_score * c / elapsed`` rounded half-up, clamped so
    pickups faster than ``c`` seconds earn exactly the initial value (a decay
    never amplifies).
    """
    if elapsed < 0.0 or not math.isfinite(elapsed):
        raise ValueError(f"elapsed {elapsed} must be finite and >= 0")
    if c <= 0.0:
        raise ValueError(f"decay constant {c} must be > 0")
    factor = 1.0 if elapsed <= c else c / elapsed
    return math.floor(initial_score * factor + 0.5)


@dataclass
class GameItem:
    """A collectible at a fixed east/north position."""

    id: int
    kind: str
    east_m: float
    north_m: float
    collected: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KIND_SCORES:
            raise ValueError(
                f"kind must be one of {sorted(KIND_SCORES)}, got {self.kind!r}")

    @property
    def initial_score(self) -> int:
        return KIND_SCORES[self.kind]


def place_items(seed: int, count: int = 10, *,
                arena_radius_m: float = ARENA_RADIUS_M,
                min_spacing_m: float = MIN_SPACING_M) -> list[GameItem]:
    """Scatter ``count`` items uniformly in a disk around the spawn point.

    Placement is rejection-sampled so items keep ``min_spacing_m`` between
    each other and from the origin (the player spawns there; an item on the
    spawn would be collected before the first input).  Kinds rotate through
    the catalogue so every arena has a mix.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if arena_radius_m <= min_spacing_m:
        raise ValueError("arena radius must exceed the minimum spacing")
    rng = random.Random(seed)
    kinds = sorted(KIND_SCORES)     # deterministic rotation order
    items: list[GameItem] = []
    attempts = 0
    while len(items) < count:
        attempts += 1
        if attempts > 1000 * max(count, 1):
            raise ValueError(
                f"cannot place {count} items with {min_spacing_m} m spacing "
                f"inside a {arena_radius_m} m arena")
        radius = arena_radius_m * math.sqrt(rng.random())
        angle = rng.random() * 2.0 * math.pi
        east, north = radius * math.cos(angle), radius * math.sin(angle)
        if math.hypot(east, north) < min_spacing_m:
            continue
        if any(math.hypot(east - it.east_m, north - it.north_m) < min_spacing_m
               for it in items):
            continue
        items.append(GameItem(id=len(items), kind=kinds[len(items) % len(kinds)],
                              east_m=east, north_m=north))
    return items


class HitEvent(NamedTuple):
    """Audit record of one pickup."""

    item_id: int
    kind: str
    points: int
    elapsed: float


@dataclass
class GameSession:
    """Mutable score/collection state for one player."""

    items: list[GameItem]
    hit_threshold_m: float = HIT_THRESHOLD_M
    decay_constant_s: float = DECAY_CONSTANT_S
    started_at: float = 0.0
    score: int = 0
    elapsed: float = 0.0
    hits: list[HitEvent] = field(default_factory=list)

    @property
    def remaining(self) -> int:
        return sum(1 for item in self.items if not item.collected)

    @property
    def all_collected(self) -> bool:
        return self.remaining == 0

    def advance_clock(self, t: float) -> None:
        elapsed = t - self.started_at
        if elapsed < self.elapsed:
            raise ValueError("session clock cannot run backwards")
        self.elapsed = elapsed

    def check_hits(self, east_m: float, north_m: float) -> list[HitEvent]:
        """Collect every uncollected item strictly inside the hit radius.

        Distance is horizontal (east/north) only; altitude error does not
        block pickups.  Returns the hit events appended this call.
        """
        events: list[HitEvent] = []
        for item in self.items:
            if item.collected:
                continue
            if math.hypot(east_m - item.east_m, north_m - item.north_m) \
                    < self.hit_threshold_m:
                item.collected = True
                points = decayed_score(item.initial_score, self.elapsed,
                                       self.decay_constant_s)
                self.score += points
                event = HitEvent(item.id, item.kind, points, self.elapsed)
                self.hits.append(event)
                events.append(event)
        return events


class SessionTick(NamedTuple):
    """One frame of game state, emitted at the filter cycle cadence."""

    t: float
    fused: tuple[float, float]          # east, north meters
    truth: tuple[float, float]
    model: int
    score: int
    elapsed: float
    remaining: int
    hits: tuple[HitEvent, ...]          # pickups that happened this tick


def cap_acceleration(ax: float, ay: float,
                     cap: float = ACCEL_CAP_MPS2) -> tuple[float, float]:
    """Clamp a steering command to the configured magnitude."""
    if not (math.isfinite(ax) and math.isfinite(ay)):
        raise ValueError("acceleration command must be finite")
    magnitude = math.hypot(ax, ay)
    if magnitude <= cap or magnitude == 0.0:
        return ax, ay
    scale = cap / magnitude
    return ax * scale, ay * scale


class GameRunner:
    """Steps the simulator -> filter -> session chain one tick at a time.

    The interactive service calls :meth:`tick` once per frame with the
    latest steering command; :func:`session_loop` wraps the same stepping
    for batch (headless) use.
    """

    def __init__(self, session: GameSession, pipeline: FusionPipeline,
                 simulator: LiveSimulator, *,
                 tick_budget_s: float = TICK_BUDGET_S,
                 clock: Callable[[], float] = time.perf_counter):
        self.session = session
        self.pipeline = pipeline
        self.simulator = simulator
        self.tick_budget_s = tick_budget_s
        self.clock = clock

    def tick(self, ax: float, ay: float) -> SessionTick | None:
        """Run one frame; ``None`` while the filter is still initializing."""
        tick_started = self.clock()
        self.simulator.set_command(*cap_acceleration(ax, ay))
        batch, fix, truth = self.simulator.next_batch()
        result = self.pipeline.step(batch, fix)
        if result is None:          # first cycle only initializes the filter
            return None
        state = result.state
        fused = ecef_to_enu(
            EcefPosition(float(state.position[0]), float(state.position[1]),
                         float(state.position[2])),
            self.simulator.cfg.origin)
        session = self.session
        session.advance_clock(result.record.t)
        hits = session.check_hits(fused.east_m, fused.north_m)
        tick = SessionTick(
            t=result.record.t,
            fused=(fused.east_m, fused.north_m),
            truth=(truth[0], truth[1]),
            model=int(result.smoothed_model),
            score=session.score,
            elapsed=session.elapsed,
            remaining=session.remaining,
            hits=tuple(hits),
        )
        spent = self.clock() - tick_started
        if spent > STALL_FACTOR * self.tick_budget_s:
            raise PipelineStalled(
                f"tick took {spent * 1e3:.1f} ms "
                f"(budget {self.tick_budget_s * 1e3:.0f} ms)")
        return tick


def session_loop(session: GameSession, pipeline: FusionPipeline,
                 simulator: LiveSimulator,
                 commands: Iterable[tuple[float, float]],
                 *,
                 tick_budget_s: float = TICK_BUDGET_S,
                 stop_when_cleared: bool = True,
                 clock: Callable[[], float] = time.perf_counter,
                 ) -> Iterator[SessionTick]:
    """Drive simulator -> filter -> game once per command and yield ticks.

    One command is consumed per tick (send ``(0, 0)`` to coast); the loop
    ends when the command source is exhausted or — with
    ``stop_when_cleared`` — right after the tick that collects the last
    item.  A tick exceeding ``STALL_FACTOR`` times its budget raises
    :class:`PipelineStalled`.
    """
    runner = GameRunner(session, pipeline, simulator,
                        tick_budget_s=tick_budget_s, clock=clock)
    for ax, ay in commands:
        tick = runner.tick(ax, ay)
        if tick is None:
            continue
        yield tick
        if stop_when_cleared and session.all_collected:
            return
