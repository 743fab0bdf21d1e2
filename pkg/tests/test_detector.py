from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qickpair.detector import (SnspdConfig, apply_dead_time, pulse_shape, render_channel,
                               synthesize_pulse)
from qickpair.errors import ConfigError
from qickpair.pulsegen import SampleGrid


@pytest.mark.parametrize("t0", [0.0, 13.7, 1234.5])
def test_peak_matches_requested_amplitude_on_50ps_grid(t0):
    cfg = SnspdConfig(rise_ps=300.0, fall_ps=20_000.0)
    w = synthesize_pulse(t0, 700.0, cfg, SampleGrid(0.0, 50.0, 2000))
    assert w.values.max() == pytest.approx(700.0, rel=5e-3)
    t_peak = cfg.rise_ps * math.log(1 + cfg.fall_ps / cfg.rise_ps)
    assert abs(w.times()[np.argmax(w.values)] - (t0 + t_peak)) <= 50.0


def test_closed_form_peak_is_exact():
    cfg = SnspdConfig()
    assert pulse_shape(cfg.peak_delay_ps, cfg) == pytest.approx(1.0, abs=1e-14)
    eps = 1e-3
    assert pulse_shape(cfg.peak_delay_ps - eps, cfg) < 1.0
    assert pulse_shape(cfg.peak_delay_ps + eps, cfg) < 1.0


def test_pulse_is_causal():
    w = synthesize_pulse(1000.0, 600.0, SnspdConfig(), SampleGrid(0.0, 10.0, 500))
    assert np.all(w.values[w.times() <= 1000.0] == 0.0)
    assert np.all(w.values[w.times() > 1000.0] > 0.0)


def test_sampled_amplitudes_stay_in_configured_range():
    cfg = SnspdConfig(fall_ps=2000.0)
    times = np.arange(50) * 100_000.0
    grid = SampleGrid(-1000.0, 25.0, int(5.1e6 / 25))
    w = render_channel(times, cfg, grid, seed=4)
    for t in times:
        m = (w.times() > t) & (w.times() < t + 20_000.0)
        peak = w.values[m].max()
        assert 500.0 * 0.995 <= peak <= 900.0


def test_empty_channel_is_silent():
    w = render_channel([], SnspdConfig(), SampleGrid(0.0, 10.0, 1000), seed=1)
    assert not w.values.any()


def _local_maxima(v, floor):
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] > floor)
    return np.flatnonzero(inner) + 1


def test_pulses_two_ns_apart_are_resolved():
    cfg = SnspdConfig()
    grid = SampleGrid(-1000.0, 10.0, 2000)
    w = render_channel([0.0, 2000.0], cfg, grid, amplitudes_mv=[700.0, 700.0])
    peaks = _local_maxima(w.values, 100.0)
    assert peaks.size == 2
    trough = w.values[peaks[0]:peaks[1]].min()
    assert trough < 0.9 * w.values[peaks[0]]


def test_dead_time_drops_second_detection():
    cfg = SnspdConfig(dead_time_ps=50_000.0)
    grid = SampleGrid(-1000.0, 20.0, 5000)
    both = render_channel([0.0, 10_000.0], cfg, grid, amplitudes_mv=[600.0, 800.0])
    first = render_channel([0.0], cfg, grid, amplitudes_mv=[600.0])
    np.testing.assert_array_equal(both.values, first.values)


def test_dead_time_is_non_paralysable():
    keep = apply_dead_time([0.0, 30.0, 60.0, 110.0, 125.0], 50.0)
    assert keep.tolist() == [True, False, True, True, False]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 200_000.0), min_size=1, max_size=6, unique=True),
       st.lists(st.floats(0.0, 200_000.0), min_size=1, max_size=6, unique=True))
def test_noiseless_superposition_is_linear(d1, d2):
    cfg = SnspdConfig(noise_rms_mv=0.0)
    grid = SampleGrid(-500.0, 40.0, 6000)
    amp = 650.0
    union = sorted(d1 + d2)
    total = render_channel(union, cfg, grid, amplitudes_mv=[amp] * len(union))
    parts = (render_channel(sorted(d1), cfg, grid, amplitudes_mv=[amp] * len(d1)).values
             + render_channel(sorted(d2), cfg, grid, amplitudes_mv=[amp] * len(d2)).values)
    np.testing.assert_allclose(total.values, parts, rtol=1e-12, atol=1e-9)


def test_noise_is_seeded():
    cfg = SnspdConfig(noise_rms_mv=2.0)
    grid = SampleGrid(0.0, 10.0, 1000)
    a = render_channel([500.0], cfg, grid, seed=8)
    b = render_channel([500.0], cfg, grid, seed=8)
    c = render_channel([500.0], cfg, grid, seed=9)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != c.values.tobytes()
    assert np.std(a.values[:40]) == pytest.approx(2.0, rel=0.5)


def test_config_validation():
    with pytest.raises(ConfigError):
        SnspdConfig(amp_min_mv=900.0, amp_max_mv=500.0)
    with pytest.raises(ConfigError):
        SnspdConfig(rise_ps=500.0, fall_ps=400.0)
    with pytest.raises(ConfigError):
        render_channel([2.0, 1.0], SnspdConfig(), SampleGrid(0.0, 1.0, 10))
