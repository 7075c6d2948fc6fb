"""Motion-model selection automaton driven by innovation magnitude.

Per filter cycle the innovation magnitude is classified into one of three
bands, the class drives a state transition over the motion models, and a
short sliding window averages the raw selections so one-off spikes cannot
flip the active model.  The selected model's velocity coefficient then
parameterizes the *next* prediction.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import IntEnum

DEFAULT_THRESHOLDS = (3.0, 7.5)
DEFAULT_WINDOW_LEN = 5


class InnovationClass(IntEnum):
    I0 = 0
    I1 = 1
    I2 = 2


class MotionModel(IntEnum):
    """P0 stationary, P1 nominal, P2 doubled-velocity advance."""

    P0 = 0
    P1 = 1
    P2 = 2

    @property
    def coefficient(self) -> float:
        """Velocity coefficient c_i: how far position advances per predict."""
        return float(self.value)


@dataclass(frozen=True, slots=True)
class InnovationRecord:
    """One cycle's innovation vector, its magnitude, and the cycle time."""

    y: tuple[float, float, float]
    magnitude: float
    t: float

    @classmethod
    def from_vector(cls, y: tuple[float, float, float], t: float) -> "InnovationRecord":
        return cls(y=y, magnitude=math.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2), t=t)


def classify(magnitude: float,
             thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> InnovationClass:
    """Band the innovation magnitude; boundary values go to the upper class."""
    low, high = thresholds
    if not 0.0 < low < high:
        raise ValueError(f"thresholds {thresholds} need 0 < low < high")
    if magnitude < 0.0 or not math.isfinite(magnitude):
        raise ValueError(f"magnitude {magnitude} must be finite and >= 0")
    if magnitude < low:
        return InnovationClass.I0
    if magnitude < high:
        return InnovationClass.I1
    return InnovationClass.I2


# Transition function over (current model, innovation class).  The table is
# memoryless — class k selects model k from any state — which reproduces the
# observable behaviors (stationary lock-in to P0, jump response through P2)
# once combined with the sliding-window damping below.  Kept as an explicit
# full table so an alternative (e.g. neighbors-only stepping) is a local edit.
TRANSITIONS: dict[MotionModel, dict[InnovationClass, MotionModel]] = {
    state: {
        InnovationClass.I0: MotionModel.P0,
        InnovationClass.I1: MotionModel.P1,
        InnovationClass.I2: MotionModel.P2,
    }
    for state in MotionModel
}


def transition(current: MotionModel, symbol: InnovationClass) -> MotionModel:
    return TRANSITIONS[current][symbol]


class ModelWindow:
    """Ring of the most recent raw model indices, averaged with half-up rounding."""

    def __init__(self, length: int = DEFAULT_WINDOW_LEN):
        if length < 1:
            raise ValueError(f"window length {length} must be >= 1")
        self._ring: deque[int] = deque(maxlen=length)

    def push(self, raw: MotionModel) -> MotionModel:
        """Add a raw selection and return the smoothed model.

        The mean is over the entries present (shorter during warm-up) and
        rounds half-up, preferring the faster model on ties.
        """
        self._ring.append(int(raw))
        mean = sum(self._ring) / len(self._ring)
        return MotionModel(math.floor(mean + 0.5))

    def contents(self) -> tuple[int, ...]:
        return tuple(self._ring)

    def __len__(self) -> int:
        return len(self._ring)


@dataclass(frozen=True, slots=True)
class SelectionTrace:
    """Everything one selection step produced, for the per-cycle model trace."""

    t: float
    magnitude: float
    innovation_class: InnovationClass
    raw_model: MotionModel
    smoothed_model: MotionModel


class ModelSelector:
    """Sequential classify -> transition -> smooth chain with its own state."""

    def __init__(self, thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
                 window_len: int = DEFAULT_WINDOW_LEN,
                 initial_model: MotionModel = MotionModel.P1):
        low, high = thresholds
        if not 0.0 < low < high:
            raise ValueError(f"thresholds {thresholds} need 0 < low < high")
        self.thresholds = (float(low), float(high))
        self.window = ModelWindow(window_len)
        self.state = initial_model          # raw automaton state
        self.last_trace: SelectionTrace | None = None

    def select(self, record: InnovationRecord) -> MotionModel:
        """One selection step; the returned model drives the next predict."""
        symbol = classify(record.magnitude, self.thresholds)
        raw = transition(self.state, symbol)
        self.state = raw
        smoothed = self.window.push(raw)
        self.last_trace = SelectionTrace(
            t=record.t, magnitude=record.magnitude, innovation_class=symbol,
            raw_model=raw, smoothed_model=smoothed,
        )
        return smoothed
