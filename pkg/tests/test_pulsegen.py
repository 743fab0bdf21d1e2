from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rect_gauss_fwhm
from qickpair.errors import ConfigError
from qickpair.pulsegen import (AnalogWaveform, DacPattern, make_double_pulse, measure_fwhm,
                               render_pattern, smooth_rf, tick_duration_ps)

samples_st = st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=32)


def test_tick_duration_at_8p1_gsps():
    pattern = DacPattern((1.0,), 8.1e9)
    assert tick_duration_ps(pattern) == pytest.approx(1975.3086, abs=1e-4)
    # longest programmable gap
    assert 2**32 * tick_duration_ps(pattern) * 1e-12 == pytest.approx(8.484, abs=1e-3)


def test_tick_duration_exact_at_16_gsps():
    assert tick_duration_ps(DacPattern((0.0,), 16e9)) == 1000.0


def test_tick_duration_at_10_gsps():
    tick = tick_duration_ps(DacPattern((0.0,), 10e9))
    assert tick == pytest.approx(1600.0)
    assert 2**32 * tick * 1e-12 == pytest.approx(6.87, abs=5e-3)


def test_full_pattern_body_span():
    w = render_pattern(DacPattern(tuple([0.5] * 32), 8.1e9), 1)
    assert w.dt_ps == pytest.approx(123.4568, abs=1e-4)
    assert w.duration_ps == pytest.approx(3950.6, abs=0.05)


def test_zero_pattern_renders_zeros():
    w = render_pattern(DacPattern((0.0, 0.0, 0.0), 8.1e9, rep_gap_ticks=3), 4)
    assert w.values.size == 4 * (3 + 48)
    assert not w.values.any()


def test_hand_enumerated_layout():
    w = render_pattern(DacPattern((1.0, 0.0), 8.1e9, rep_gap_ticks=1), 2)
    assert w.values.size == 36
    assert np.flatnonzero(w.values).tolist() == [0, 18]


@settings(max_examples=200, deadline=None)
@given(samples_st, st.integers(0, 20), st.integers(1, 6))
def test_rendered_length_matches_counting_oracle(samples, gap, reps):
    w = render_pattern(DacPattern(tuple(samples), 8.1e9, gap), reps)
    n = 0
    for _ in range(reps):
        n += len(samples)
        for _tick in range(gap):
            n += 16
    assert w.values.size == n


@settings(max_examples=100, deadline=None)
@given(samples_st, st.integers(0, 8), st.integers(1, 4), st.integers(1, 4))
def test_rendering_is_circular(samples, gap, n, m):
    p = DacPattern(tuple(samples), 8.1e9, gap)
    joined = np.concatenate([render_pattern(p, n).values, render_pattern(p, m).values])
    np.testing.assert_array_equal(render_pattern(p, n + m).values, joined)


@settings(max_examples=100, deadline=None)
@given(samples_st, st.integers(1, 5))
def test_zero_gap_repeats_back_to_back(samples, reps):
    w = render_pattern(DacPattern(tuple(samples), 8.1e9, 0), reps)
    np.testing.assert_array_equal(w.values, np.tile(samples, reps))


def test_pattern_validation():
    with pytest.raises(ConfigError):
        DacPattern(tuple([0.0] * 33))
    with pytest.raises(ConfigError):
        DacPattern(())
    with pytest.raises(ConfigError):
        DacPattern((1.5,))
    with pytest.raises(ConfigError):
        DacPattern((0.0,), rep_gap_ticks=2**32)
    DacPattern((0.0,), rep_gap_ticks=2**32 - 1)


def test_double_pulse_at_100_mhz():
    pattern, rate = make_double_pulse(200.0, 1975.0, 100e6, 8.1e9)
    assert len(pattern.samples) == 32
    assert np.flatnonzero(pattern.samples).tolist() == [0, 1, 16, 17]
    assert pattern.period_ps == pytest.approx(9876.5, abs=0.05)
    assert pattern.period_samples == 5 * 16
    assert rate == pytest.approx(101.25e6, rel=1e-9)


def test_double_pulse_single_sample_width():
    dt = 1e12 / 8.1e9
    pattern, _ = make_double_pulse(dt, 16 * dt, 100e6, 8.1e9)
    assert np.flatnonzero(pattern.samples).tolist() == [0, 16]


def test_double_pulse_width_rounds_to_nearest_sample():
    pattern, _ = make_double_pulse(250.0, 1975.0, 100e6, 8.1e9)
    assert np.flatnonzero(pattern.samples).tolist() == [0, 1, 16, 17]


def test_double_pulse_rejects_impossible_layouts():
    with pytest.raises(ConfigError):
        make_double_pulse(10.0, 1975.0, 100e6)
    with pytest.raises(ConfigError):
        make_double_pulse(500.0, 300.0, 100e6)
    with pytest.raises(ConfigError):
        make_double_pulse(500.0, 3800.0, 100e6)


def test_smooth_zero_fwhm_is_identity():
    w = AnalogWaveform(5.0, 10.0, np.random.default_rng(1).normal(size=100))
    out = smooth_rf(w, 0.0)
    np.testing.assert_array_equal(out.values, w.values)
    assert out.t0_ps == w.t0_ps and out.dt_ps == w.dt_ps


def test_smoothed_rectangle_matches_closed_form_width():
    v = np.zeros(4000)
    v[1900:2100] = 1.0
    for kernel in (150.0, 200.0):
        out = smooth_rf(AnalogWaveform(0.0, 1.0, v), kernel)
        assert measure_fwhm(out) == pytest.approx(rect_gauss_fwhm(200.0, kernel), abs=1.0)
    # the kernel that widens a 200 ps rectangle to 250 ps
    assert rect_gauss_fwhm(200.0, 200.17) == pytest.approx(250.0, abs=0.05)


def test_golden_drive_pulse_is_about_250_ps_wide():
    pattern, _ = make_double_pulse(200.0, 1975.0, 100e6, 8.1e9)
    drive = smooth_rf(render_pattern(pattern, 2), 127.6)
    late = AnalogWaveform(0.0, drive.dt_ps, drive.values[8:28])
    width = 2 * drive.dt_ps
    expected = rect_gauss_fwhm(width, 127.6)
    assert expected == pytest.approx(250.0, abs=0.1)
    assert measure_fwhm(late) == pytest.approx(expected, abs=drive.dt_ps)


@pytest.mark.parametrize("fwhm", [30.0, 100.0, 250.0])
def test_impulse_becomes_gaussian_of_requested_width(fwhm):
    dt = 2.0
    v = np.zeros(1001)
    v[500] = 1.0
    out = smooth_rf(AnalogWaveform(0.0, dt, v), fwhm)
    assert measure_fwhm(out) == pytest.approx(fwhm, abs=dt)
    sigma = fwhm / (2 * math.sqrt(2 * math.log(2)))
    t = (np.arange(1001) - 500) * dt
    ref = np.exp(-0.5 * (t / sigma) ** 2)
    ref /= ref.sum()
    # kernel is truncated at six sigma, where the Gaussian is ~1.5e-8 of its peak
    np.testing.assert_allclose(out.values, ref, rtol=0, atol=1e-7 * ref.max())


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1), st.floats(10.0, 400.0))
def test_smoothing_is_linear(a, b, seed, fwhm):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=300)
    y = rng.normal(size=300)
    wx, wy = AnalogWaveform(0.0, 20.0, x), AnalogWaveform(0.0, 20.0, y)
    lhs = smooth_rf(AnalogWaveform(0.0, 20.0, a * x + b * y), fwhm).values
    rhs = a * smooth_rf(wx, fwhm).values + b * smooth_rf(wy, fwhm).values
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale + 1e-12


def test_negative_fwhm_rejected():
    with pytest.raises(ConfigError):
        smooth_rf(AnalogWaveform(0.0, 1.0, np.ones(3)), -1.0)
