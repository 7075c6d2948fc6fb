import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfafusion.deadreckon import (
    Displacement,
    ImuBatch,
    ImuSample,
    batch_samples,
    integrate_position,
    integrate_velocity,
    read_imu_csv,
)


def make_batch(accels, dt=0.02, t0=0.0):
    samples = tuple(
        ImuSample(t=t0 + k * dt, ax=a[0], ay=a[1], az=a[2])
        for k, a in enumerate(accels)
    )
    return ImuBatch(samples=samples, dt_each=dt)


def stepwise_oracle(accels, dt, v0):
    """Independent step-by-step integration: velocity first, then position."""
    v = list(v0)
    p = [0.0, 0.0, 0.0]
    for a in accels:
        for i in range(3):
            v[i] = v[i] + a[i] * dt
        for i in range(3):
            p[i] = p[i] + v[i] * dt
    return p, v


def test_zero_acceleration_zero_start_is_bit_exact_zero():
    batch = make_batch([(0.0, 0.0, 0.0)] * 4)
    assert integrate_velocity(batch, (0.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)
    d = integrate_position(batch, (0.0, 0.0, 0.0))
    assert (d.dx, d.dy, d.dz, d.dvx, d.dvy, d.dvz) == (0.0,) * 6


def test_constant_acceleration_velocity():
    batch = make_batch([(1.0, 0.0, 0.0)] * 4)
    v = integrate_velocity(batch, (0.0, 0.0, 0.0))
    assert v[0] == pytest.approx(0.08, abs=1e-15)
    assert v[1] == 0.0 and v[2] == 0.0


def test_alternating_acceleration_cancels():
    batch = make_batch([(1.0, -1.0, 0.0), (-1.0, 1.0, 0.0)] * 2)
    v = integrate_velocity(batch, (0.0, 0.0, 0.0))
    assert v == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


def test_constant_acceleration_position_hand_value():
    # v after each 20 ms step: .02 .04 .06 .08; p = .02*(.02+.04+.06+.08) = .004
    batch = make_batch([(1.0, 0.0, 0.0)] * 4)
    d = integrate_position(batch, (0.0, 0.0, 0.0))
    assert d.dx == pytest.approx(0.004, abs=1e-15)
    assert d.dvx == pytest.approx(0.08, abs=1e-15)
    assert d.dy == d.dz == 0.0


def test_uniform_motion_without_acceleration():
    batch = make_batch([(0.0, 0.0, 0.0)] * 4)
    d = integrate_position(batch, (1.0, 0.0, 0.0))
    assert d.dx == pytest.approx(0.08, abs=1e-15)
    assert d.dvx == 0.0


accel_st = st.tuples(
    st.floats(min_value=-20.0, max_value=20.0),
    st.floats(min_value=-20.0, max_value=20.0),
    st.floats(min_value=-20.0, max_value=20.0),
)
v0_st = accel_st


@given(accels=st.lists(accel_st, min_size=4, max_size=4), v0=v0_st)
@settings(max_examples=200)
def test_matches_stepwise_oracle(accels, v0):
    batch = make_batch(accels)
    d = integrate_position(batch, v0)
    p_ref, v_ref = stepwise_oracle(accels, 0.02, v0)
    assert d.position == pytest.approx(tuple(p_ref), abs=1e-15)
    vel = integrate_velocity(batch, v0)
    assert vel == pytest.approx(tuple(v_ref), abs=1e-15)
    assert d.velocity == pytest.approx(tuple(v - v0[i] for i, v in enumerate(v_ref)), abs=1e-12)


@given(accels=st.lists(accel_st, min_size=4, max_size=4),
       k=st.floats(min_value=-8.0, max_value=8.0))
def test_velocity_delta_scales_linearly(accels, k):
    base = integrate_position(make_batch(accels), (0.0, 0.0, 0.0))
    scaled = integrate_position(
        make_batch([(k * ax, k * ay, k * az) for ax, ay, az in accels]), (0.0, 0.0, 0.0)
    )
    for got, want in zip(scaled.velocity, base.velocity):
        assert math.isclose(got, k * want, abs_tol=1e-9)


@given(first=st.lists(accel_st, min_size=4, max_size=4),
       second=st.lists(accel_st, min_size=4, max_size=4),
       v0=v0_st)
@settings(max_examples=150)
def test_consecutive_batches_add_up(first, second, v0):
    a = integrate_position(make_batch(first, t0=0.0), v0)
    v_mid = integrate_velocity(make_batch(first, t0=0.0), v0)
    b = integrate_position(make_batch(second, t0=0.08), v_mid)
    combined = integrate_position(make_batch(first + second, t0=0.0), v0)
    assert combined.dx == pytest.approx(a.dx + b.dx, abs=1e-12)
    assert combined.dy == pytest.approx(a.dy + b.dy, abs=1e-12)
    assert combined.dz == pytest.approx(a.dz + b.dz, abs=1e-12)
    assert combined.dvx == pytest.approx(a.dvx + b.dvx, abs=1e-12)


def test_batch_validation():
    with pytest.raises(ValueError):
        ImuBatch(samples=(), dt_each=0.02)
    with pytest.raises(ValueError):
        make_batch([(0.0, 0.0, 0.0)] * 2, dt=-0.01)
    with pytest.raises(ValueError):
        ImuSample(t=0.0, ax=math.nan, ay=0.0, az=0.0)
    with pytest.raises(ValueError):  # non-increasing times
        ImuBatch(samples=(ImuSample(0.0, 0, 0, 0), ImuSample(0.0, 0, 0, 0)))


def test_batch_time_bounds():
    batch = make_batch([(0.0, 0.0, 0.0)] * 4, dt=0.02, t0=10.0)
    assert batch.start_t == 10.0
    assert batch.end_t == pytest.approx(10.08)
    assert batch.duration == pytest.approx(0.08)


def test_batcher_groups_and_drops_partial_tail():
    samples = [ImuSample(t=k * 0.02, ax=float(k), ay=0.0, az=0.0) for k in range(10)]
    batches = list(batch_samples(iter(samples), batch_size=4, dt_each=0.02))
    assert len(batches) == 2  # 10 samples -> two full batches, 2 left over
    assert [s.ax for s in batches[0].samples] == [0.0, 1.0, 2.0, 3.0]
    assert [s.ax for s in batches[1].samples] == [4.0, 5.0, 6.0, 7.0]


def test_read_imu_csv_round_trip():
    lines = [
        "t,ax,ay,az",
        "# a comment",
        "0.00,0.1,-0.2,0.0",
        "0.02,0.0,0.0,9.0",
        "",
        "0.04,1.5,2.5,-3.5",
    ]
    samples = list(read_imu_csv(lines))
    assert len(samples) == 3
    assert samples[0] == ImuSample(0.0, 0.1, -0.2, 0.0)
    assert samples[2].az == -3.5


def test_read_imu_csv_rejects_bad_input():
    with pytest.raises(ValueError):
        list(read_imu_csv(["time,ax,ay,az", "0,0,0,0"]))
    with pytest.raises(ValueError):
        list(read_imu_csv(["t,ax,ay,az", "0,0,0"]))
    with pytest.raises(ValueError):
        list(read_imu_csv(["t,ax,ay,az", "0,0,0,zero"]))
    with pytest.raises(ValueError):
        list(read_imu_csv(["t,ax,ay,az", "0.02,0,0,0", "0.02,0,0,0"]))
