"""DAC pulse-generator emulation.

A pattern of up to 32 amplitude samples is played circularly on one DAC
channel, followed by a programmable gap counted in fabric clock ticks.
One fabric tick is 16 DAC samples, so 2**32 ticks at 8.1 Gsps is ~8.48 s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

MAX_PATTERN_SAMPLES = 32
SAMPLES_PER_TICK = 16
MAX_GAP_TICKS = 2**32 - 1
DEFAULT_DAC_RATE_HZ = 8.1e9


@dataclass(frozen=True)
class SampleGrid:
    """Uniform sampling grid: ``n`` samples starting at ``t0_ps`` spaced ``dt_ps``."""

    t0_ps: float
    dt_ps: float
    n: int

    def __post_init__(self):
        if not self.dt_ps > 0:
            raise ConfigError(f"grid spacing must be positive, got {self.dt_ps}")
        if self.n < 1:
            raise ConfigError(f"grid needs at least one sample, got {self.n}")

    def times(self) -> np.ndarray:
        return self.t0_ps + self.dt_ps * np.arange(self.n)


@dataclass(frozen=True, eq=False)
class AnalogWaveform:
    t0_ps: float
    dt_ps: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ConfigError("waveform values must be a non-empty 1-D array")
        if not self.dt_ps > 0:
            raise ConfigError(f"dt_ps must be positive, got {self.dt_ps}")
        object.__setattr__(self, "values", values)

    @property
    def duration_ps(self) -> float:
        return self.values.size * self.dt_ps

    @property
    def grid(self) -> SampleGrid:
        return SampleGrid(self.t0_ps, self.dt_ps, self.values.size)

    def times(self) -> np.ndarray:
        return self.t0_ps + self.dt_ps * np.arange(self.values.size)

    def with_values(self, values) -> "AnalogWaveform":
        return AnalogWaveform(self.t0_ps, self.dt_ps, values)


@dataclass(frozen=True, eq=False)
class DacPattern:
    samples: tuple
    sample_rate_hz: float = DEFAULT_DAC_RATE_HZ
    rep_gap_ticks: int = 0

    def __post_init__(self):
        samples = tuple(float(s) for s in self.samples)
        if not 1 <= len(samples) <= MAX_PATTERN_SAMPLES:
            raise ConfigError(
                f"pattern needs 1..{MAX_PATTERN_SAMPLES} samples, got {len(samples)}")
        if any(not -1.0 <= s <= 1.0 for s in samples):
            raise ConfigError("pattern samples must lie in [-1, +1]")
        if not self.sample_rate_hz > 0:
            raise ConfigError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if int(self.rep_gap_ticks) != self.rep_gap_ticks or not 0 <= self.rep_gap_ticks <= MAX_GAP_TICKS:
            raise ConfigError(f"rep_gap_ticks must fit in 32 bits, got {self.rep_gap_ticks}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "rep_gap_ticks", int(self.rep_gap_ticks))

    @property
    def sample_period_ps(self) -> float:
        return 1e12 / self.sample_rate_hz

    @property
    def period_samples(self) -> int:
        return len(self.samples) + SAMPLES_PER_TICK * self.rep_gap_ticks

    @property
    def period_ps(self) -> float:
        return self.period_samples * self.sample_period_ps


def tick_duration_ps(pattern: DacPattern) -> float:
    if not pattern.sample_rate_hz > 0:
        raise ConfigError("sample rate must be positive")
    return SAMPLES_PER_TICK * 1e12 / pattern.sample_rate_hz


def render_pattern(pattern: DacPattern, n_repetitions: int) -> AnalogWaveform:
    """Play the pattern ``n_repetitions`` times, each followed by its gap of zeros."""
    if n_repetitions < 1:
        raise ConfigError(f"n_repetitions must be >= 1, got {n_repetitions}")
    one = np.zeros(pattern.period_samples)
    one[: len(pattern.samples)] = pattern.samples
    return AnalogWaveform(0.0, pattern.sample_period_ps, np.tile(one, n_repetitions))


def make_double_pulse(width_ps: float, separation_ps: float, target_rate_hz: float,
                      sample_rate_hz: float = DEFAULT_DAC_RATE_HZ) -> tuple[DacPattern, float]:
    """Two full-scale rectangular pulses (early/late time bins) in one 32-sample pattern.

    Width and separation are rounded to whole DAC samples; the repetition
    period is rounded to the nearest whole fabric tick. Returns the pattern
    and the achieved repetition rate in Hz.
    """
    if not sample_rate_hz > 0:
        raise ConfigError("sample rate must be positive")
    if not target_rate_hz > 0:
        raise ConfigError("target rate must be positive")
    dt = 1e12 / sample_rate_hz
    if width_ps < dt * (1 - 1e-9):
        raise ConfigError(f"pulse width {width_ps} ps is shorter than one sample ({dt:.4f} ps)")
    width = max(1, int(round(width_ps / dt)))
    sep = int(round(separation_ps / dt))
    if sep < width:
        raise ConfigError("pulse separation must be at least the pulse width")
    if sep + width > MAX_PATTERN_SAMPLES:
        raise ConfigError(
            f"separation + width = {sep + width} samples exceeds {MAX_PATTERN_SAMPLES}")

    samples = np.zeros(MAX_PATTERN_SAMPLES)
    samples[:width] = 1.0
    samples[sep:sep + width] = 1.0

    tick_ps = SAMPLES_PER_TICK * dt
    body_ticks = MAX_PATTERN_SAMPLES // SAMPLES_PER_TICK
    period_ticks = max(body_ticks, int(round(1e12 / target_rate_hz / tick_ps)))
    pattern = DacPattern(tuple(samples), sample_rate_hz, period_ticks - body_ticks)
    return pattern, 1e12 / pattern.period_ps


def gaussian_kernel(fwhm_ps: float, dt_ps: float) -> np.ndarray:
    sigma = fwhm_ps / (2.0 * math.sqrt(2.0 * math.log(2.0))) / dt_ps
    half = max(1, int(math.ceil(6.0 * sigma)))
    x = np.arange(-half, half + 1)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def smooth_rf(waveform: AnalogWaveform, fwhm_ps: float) -> AnalogWaveform:
    """Gaussian low-pass standing in for the RF amplifier bandwidth.

    The kernel is normalised to unit sum, so pulse area is preserved away
    from the record edges. ``fwhm_ps == 0`` returns an unchanged copy.
    """
    if fwhm_ps < 0:
        raise ConfigError(f"fwhm must be non-negative, got {fwhm_ps}")
    if fwhm_ps == 0:
        return waveform.with_values(waveform.values.copy())
    k = gaussian_kernel(fwhm_ps, waveform.dt_ps)
    half = k.size // 2
    full = np.convolve(waveform.values, k, mode="full")
    return waveform.with_values(full[half:half + waveform.values.size])


def measure_fwhm(waveform: AnalogWaveform) -> float:
    """Full width at half maximum of the dominant peak, with linear edge interpolation."""
    v = waveform.values
    p = int(np.argmax(v))
    half = v[p] / 2.0
    i = p
    while i > 0 and v[i - 1] >= half:
        i -= 1
    j = p
    while j < v.size - 1 and v[j + 1] >= half:
        j += 1
    if i == 0 or j == v.size - 1:
        raise ValueError("peak is not enclosed by half-maximum crossings")
    left = (i - 1) + (half - v[i - 1]) / (v[i] - v[i - 1])
    right = j + (v[j] - half) / (v[j] - v[j + 1])
    return (right - left) * waveform.dt_ps
