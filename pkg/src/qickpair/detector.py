"""SNSPD voltage pulses and per-channel analog traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pulsegen import AnalogWaveform, SampleGrid

# beyond this many fall constants a pulse is below one ADC LSB at any sane full scale
TAIL_FALL_CONSTANTS = 12.0


@dataclass(frozen=True)
class SnspdConfig:
    amp_min_mv: float = 500.0
    amp_max_mv: float = 900.0
    rise_ps: float = 300.0
    # short enough to clear the QBuf threshold within one 10 ns pump period
    fall_ps: float = 2_000.0
    noise_rms_mv: float = 0.0
    dead_time_ps: float = 0.0

    def __post_init__(self):
        if not 0 < self.amp_min_mv <= self.amp_max_mv:
            raise ConfigError("need 0 < amp_min_mv <= amp_max_mv")
        if not 0 < self.rise_ps < self.fall_ps:
            raise ConfigError("need 0 < rise_ps < fall_ps")
        if self.noise_rms_mv < 0 or self.dead_time_ps < 0:
            raise ConfigError("noise_rms_mv and dead_time_ps must be >= 0")

    @property
    def peak_delay_ps(self) -> float:
        return self.rise_ps * math.log1p(self.fall_ps / self.rise_ps)

    @property
    def shape_peak(self) -> float:
        tp = self.peak_delay_ps
        return -math.expm1(-tp / self.rise_ps) * math.exp(-tp / self.fall_ps)


def pulse_shape(dt_ps, cfg: SnspdConfig) -> np.ndarray:
    """Unit-peak pulse evaluated at delays ``dt_ps`` after the photon arrival."""
    dt = np.asarray(dt_ps, dtype=float)
    pos = np.clip(dt, 0.0, None)
    v = -np.expm1(-pos / cfg.rise_ps) * np.exp(-pos / cfg.fall_ps) / cfg.shape_peak
    return np.where(dt > 0, v, 0.0)


def synthesize_pulse(t0_ps: float, amplitude_mv: float, cfg: SnspdConfig,
                     grid: SampleGrid) -> AnalogWaveform:
    if not amplitude_mv > 0:
        raise ConfigError("amplitude must be positive")
    return AnalogWaveform(grid.t0_ps, grid.dt_ps, amplitude_mv * pulse_shape(grid.times() - t0_ps, cfg))


def apply_dead_time(times, dead_time_ps: float) -> np.ndarray:
    """Boolean mask of accepted detections (non-paralysable dead time)."""
    times = np.asarray(times, dtype=float)
    keep = np.ones(times.size, bool)
    if dead_time_ps <= 0 or times.size < 2:
        return keep
    last = -math.inf
    for i, t in enumerate(times):
        if t - last < dead_time_ps:
            keep[i] = False
        else:
            last = t
    return keep


def add_pulses(values: np.ndarray, grid: SampleGrid, times, amplitudes, cfg: SnspdConfig) -> None:
    """Accumulate pulses into ``values`` in place, touching only samples each pulse reaches."""
    tail = TAIL_FALL_CONSTANTS * cfg.fall_ps
    for t, a in zip(times, amplitudes):
        i0 = max(0, int(math.floor((t - grid.t0_ps) / grid.dt_ps)) + 1)
        i1 = min(grid.n, int(math.ceil((t + tail - grid.t0_ps) / grid.dt_ps)))
        if i1 <= i0:
            continue
        ts = grid.t0_ps + grid.dt_ps * np.arange(i0, i1)
        values[i0:i1] += a * pulse_shape(ts - t, cfg)


def render_channel(times, cfg: SnspdConfig, grid: SampleGrid, seed=None,
                   amplitudes_mv=None) -> AnalogWaveform:
    """Superpose one pulse per accepted detection and add Gaussian noise.

    ``times`` must be sorted. Amplitudes are drawn uniformly from the
    configured range unless given explicitly.
    """
    times = np.asarray([getattr(t, "time_ps", t) for t in times], dtype=float)
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise ConfigError("detection times must be sorted")
    rng = np.random.default_rng(seed)
    keep = apply_dead_time(times, cfg.dead_time_ps)
    if amplitudes_mv is None:
        amplitudes_mv = rng.uniform(cfg.amp_min_mv, cfg.amp_max_mv, times.size)
    amplitudes_mv = np.asarray(amplitudes_mv, dtype=float)
    values = np.zeros(grid.n)
    add_pulses(values, grid, times[keep], amplitudes_mv[keep], cfg)
    if cfg.noise_rms_mv > 0:
        values += rng.normal(0.0, cfg.noise_rms_mv, grid.n)
    return AnalogWaveform(grid.t0_ps, grid.dt_ps, values)
