import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfafusion.selector import (
    InnovationClass,
    InnovationRecord,
    ModelSelector,
    ModelWindow,
    MotionModel,
    TRANSITIONS,
    classify,
    transition,
)


def test_classify_bands_and_boundaries():
    assert classify(0.0) is InnovationClass.I0
    assert classify(2.999999) is InnovationClass.I0
    # Boundary values belong to the upper class.
    assert classify(3.0) is InnovationClass.I1
    assert classify(7.499999) is InnovationClass.I1
    assert classify(7.5) is InnovationClass.I2
    assert classify(1e9) is InnovationClass.I2


def test_classify_hand_computed_vector():
    record = InnovationRecord.from_vector((4.0, 4.0, 4.0), t=0.0)
    assert record.magnitude == pytest.approx(math.sqrt(48.0))
    assert classify(record.magnitude) is InnovationClass.I1  # ~6.93 < 7.5


def test_classify_custom_thresholds():
    assert classify(4.0, (5.0, 10.0)) is InnovationClass.I0
    assert classify(5.0, (5.0, 10.0)) is InnovationClass.I1
    assert classify(10.0, (5.0, 10.0)) is InnovationClass.I2


def test_classify_rejects_bad_inputs():
    with pytest.raises(ValueError):
        classify(-0.1)
    with pytest.raises(ValueError):
        classify(math.nan)
    with pytest.raises(ValueError):
        classify(1.0, (7.5, 3.0))
    with pytest.raises(ValueError):
        classify(1.0, (0.0, 3.0))


@given(a=st.floats(min_value=0.0, max_value=100.0),
       b=st.floats(min_value=0.0, max_value=100.0))
def test_classify_is_monotone(a, b):
    lo, hi = sorted((a, b))
    assert classify(lo) <= classify(hi)


def test_transition_table_examples():
    assert transition(MotionModel.P1, InnovationClass.I0) is MotionModel.P0
    assert transition(MotionModel.P0, InnovationClass.I2) is MotionModel.P2
    assert transition(MotionModel.P2, InnovationClass.I1) is MotionModel.P1


def test_transition_table_is_total():
    for state in MotionModel:
        for symbol in InnovationClass:
            assert TRANSITIONS[state][symbol] in MotionModel


def test_model_coefficients():
    assert MotionModel.P0.coefficient == 0.0
    assert MotionModel.P1.coefficient == 1.0
    assert MotionModel.P2.coefficient == 2.0


def push_all(window: ModelWindow, values) -> list[int]:
    return [int(window.push(MotionModel(v))) for v in values]


def test_window_worked_examples():
    w = ModelWindow(5)
    push_all(w, [0, 0, 0, 0])
    assert w.push(MotionModel.P0) is MotionModel.P0      # mean 0

    w = ModelWindow(5)
    push_all(w, [1, 1, 2, 2])
    assert w.push(MotionModel.P2) is MotionModel.P2      # mean 1.6 rounds to 2

    w = ModelWindow(5)
    push_all(w, [0, 1, 0, 1])
    assert w.push(MotionModel.P1) is MotionModel.P1      # mean 0.6 rounds to 1


def test_window_half_up_tie_prefers_faster_model():
    w = ModelWindow(2)
    w.push(MotionModel.P0)
    assert w.push(MotionModel.P1) is MotionModel.P1      # mean 0.5 -> 1


def test_window_warm_up_uses_present_entries():
    w = ModelWindow(5)
    assert w.push(MotionModel.P1) is MotionModel.P1      # single entry
    assert w.push(MotionModel.P2) is MotionModel.P2      # mean 1.5 -> 2
    assert len(w) == 2


def test_window_eviction_order():
    w = ModelWindow(3)
    push_all(w, [2, 0, 0, 0])                            # the 2 is evicted
    assert w.contents() == (0, 0, 0)


@given(st.lists(st.integers(min_value=0, max_value=2), min_size=1, max_size=30))
def test_smoothed_never_extrapolates(values):
    w = ModelWindow(5)
    for v in values:
        smoothed = w.push(MotionModel(v))
        ring = w.contents()
        assert min(ring) <= int(smoothed) <= max(ring)


def test_single_raw_outlier_never_flips_smoothed_output():
    # Exhaustive over all (steady value, outlier) pairs: a raw model appearing
    # for exactly one cycle amid a steady different value cannot change the
    # smoothed output once the window is full.
    for steady, outlier in itertools.product(range(3), repeat=2):
        if steady == outlier:
            continue
        w = ModelWindow(5)
        seq = [steady] * 5 + [outlier] + [steady] * 5
        outputs = push_all(w, seq)
        assert all(o == steady for o in outputs[4:]), (steady, outlier, outputs)


def test_all_full_windows_brute_force_round_half_up():
    # Every reachable full window agrees with an independent mean computation.
    for contents in itertools.product(range(3), repeat=5):
        w = ModelWindow(5)
        *head, last = contents
        push_all(w, head)
        got = int(w.push(MotionModel(last)))
        want = math.floor(sum(contents) / 5 + 0.5)
        assert got == want, (contents, got, want)


def test_alternating_extremes_change_at_most_once_per_three_cycles():
    w = ModelWindow(5)
    outputs = push_all(w, [0, 2] * 10)
    for k in range(len(outputs) - 2):
        trio = outputs[k:k + 3]
        changes = sum(1 for a, b in zip(trio, trio[1:]) if a != b)
        assert changes <= 1


def record(magnitude: float, t: float = 0.0) -> InnovationRecord:
    return InnovationRecord(y=(magnitude, 0.0, 0.0), magnitude=magnitude, t=t)


def test_selector_startup_first_record_mid_band():
    selector = ModelSelector()
    assert selector.select(record(5.0)) is MotionModel.P1


def test_selector_persistent_low_innovation_locks_p0():
    selector = ModelSelector()
    results = [selector.select(record(0.4, t=k * 0.08)) for k in range(10)]
    assert all(m is MotionModel.P0 for m in results[:])
    assert results[-1] is MotionModel.P0


def test_selector_trace_fields():
    selector = ModelSelector()
    selector.select(record(8.0, t=1.25))
    trace = selector.last_trace
    assert trace is not None
    assert trace.t == 1.25
    assert trace.innovation_class is InnovationClass.I2
    assert trace.raw_model is MotionModel.P2
    assert trace.smoothed_model is MotionModel.P2
    assert trace.magnitude == pytest.approx(8.0)


def test_selector_uses_configured_thresholds():
    selector = ModelSelector(thresholds=(10.0, 20.0))
    assert selector.select(record(9.0)) is MotionModel.P0
    selector = ModelSelector(thresholds=(0.5, 1.0))
    assert selector.select(record(0.75)) is MotionModel.P1


def test_selector_smoothing_damps_single_jump():
    selector = ModelSelector()
    for _ in range(5):
        selector.select(record(0.1))
    # One huge innovation: raw goes P2 but the window keeps the smoothed at P0.
    assert selector.select(record(50.0)) is MotionModel.P0
    assert selector.last_trace.raw_model is MotionModel.P2
    # Sustained high innovation does flip the model within the window depth.
    outputs = [selector.select(record(50.0)) for _ in range(4)]
    assert outputs[-1] is MotionModel.P2
