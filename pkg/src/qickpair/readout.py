"""ADC sampling and the threshold-qualified capture buffer (QBuf)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .pulsegen import AnalogWaveform

REARM_END_OF_WINDOW = "end-of-window"


@dataclass(frozen=True)
class AdcConfig:
    sample_rate_hz: float = 2.5e9
    bits: int = 14
    full_scale_mv: float = 1000.0
    noise_rms_codes: float = 0.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ConfigError("ADC sample rate must be positive")
        if int(self.bits) != self.bits or self.bits < 2:
            raise ConfigError("ADC bits must be an integer >= 2")
        if not self.full_scale_mv > 0:
            raise ConfigError("full_scale_mv must be positive")
        if self.noise_rms_codes < 0:
            raise ConfigError("noise_rms_codes must be >= 0")

    @property
    def dt_ps(self) -> float:
        return 1e12 / self.sample_rate_hz

    @property
    def code_range(self) -> tuple[int, int]:
        half = 2 ** (self.bits - 1)
        return -half, half - 1


@dataclass(frozen=True)
class QbufConfig:
    threshold_codes: int = 400
    window_len_samples: int = 20
    # samples kept ahead of the trigger so the leading edge is always bracketed
    pretrigger_samples: int = 2
    rearm: str = REARM_END_OF_WINDOW

    def __post_init__(self):
        if int(self.threshold_codes) != self.threshold_codes:
            raise ConfigError("threshold_codes must be an integer")
        if int(self.window_len_samples) != self.window_len_samples or self.window_len_samples < 2:
            raise ConfigError("window_len_samples must be an integer >= 2")
        if int(self.pretrigger_samples) != self.pretrigger_samples or not 0 <= self.pretrigger_samples < self.window_len_samples:
            raise ConfigError("pretrigger_samples must be an integer in [0, window_len_samples)")
        if self.rearm != REARM_END_OF_WINDOW:
            raise ConfigError(f"unsupported rearm policy {self.rearm!r}")


@dataclass(frozen=True, eq=False)
class CapturedPulse:
    channel: str
    coarse_tag: int
    samples: np.ndarray = field(repr=False)
    sample_rate_hz: float = 2.5e9
    pretrigger: int = 0

    def __eq__(self, other):
        if not isinstance(other, CapturedPulse):
            return NotImplemented
        return (self.channel == other.channel and self.coarse_tag == other.coarse_tag
                and self.sample_rate_hz == other.sample_rate_hz and self.pretrigger == other.pretrigger
                and np.array_equal(self.samples, other.samples))


def digitize(analog: AnalogWaveform, cfg: AdcConfig, seed=None) -> np.ndarray:
    """Quantise to signed ADC codes at ``cfg.sample_rate_hz``.

    The input is linearly resampled onto the ADC clock when its spacing
    differs; sample 0 is taken at ``analog.t0_ps``.
    """
    v = analog.values
    if not np.isclose(analog.dt_ps, cfg.dt_ps, rtol=1e-12, atol=0.0):
        n = int(np.floor((v.size - 1) * analog.dt_ps / cfg.dt_ps + 1e-9)) + 1
        v = np.interp(np.arange(n) * cfg.dt_ps, np.arange(v.size) * analog.dt_ps, v)
    lo, hi = cfg.code_range
    x = v * (2 ** (cfg.bits - 1) / cfg.full_scale_mv)
    if cfg.noise_rms_codes > 0:
        x = x + np.random.default_rng(seed).normal(0.0, cfg.noise_rms_codes, x.size)
    return np.clip(np.rint(x), lo, hi).astype(np.int32)


def qbuf_capture(codes, cfg: QbufConfig, channel: str, sample_rate_hz: float = 2.5e9,
                 tag_offset: int = 0) -> list[CapturedPulse]:
    """Capture a window at every sample strictly above threshold, re-arming at window end.

    The window starts ``pretrigger_samples`` before the triggering sample,
    whose index is the coarse tag (plus ``tag_offset`` when ``codes`` is a
    slice of a longer stream). Triggers too close to either end of the
    stream to fit a whole window are dropped.
    """
    codes = np.asarray(codes)
    win = cfg.window_len_samples
    pre = cfg.pretrigger_samples
    above = np.flatnonzero(codes > cfg.threshold_codes)
    out = []
    k = int(np.searchsorted(above, pre, side="left"))
    while k < above.size:
        idx = int(above[k])
        start = idx - pre
        if start + win > codes.size:
            break
        out.append(CapturedPulse(channel, tag_offset + idx, codes[start:start + win].copy(),
                                 sample_rate_hz, pre))
        # next window may not reach back into this one
        k = int(np.searchsorted(above, start + win + pre, side="left"))
    return out
