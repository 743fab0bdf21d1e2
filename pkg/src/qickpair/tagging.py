"""Offline processing of captures: fine timestamps, coincidences, histograms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, ContractError, ExtractionError
from .readout import CapturedPulse

DEFAULT_WINDOW_PS = 100_000.0


class TimeTag(NamedTuple):
    channel: str
    time_ps: float


@dataclass(frozen=True, eq=False)
class DeltaTHistogram:
    bin_width_ps: float
    origin_ps: float
    counts: np.ndarray = field(repr=False)
    underflow: int = 0
    overflow: int = 0

    @property
    def n_bins(self) -> int:
        return self.counts.size

    @property
    def edges(self) -> np.ndarray:
        return self.origin_ps + self.bin_width_ps * np.arange(self.counts.size + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.origin_ps + self.bin_width_ps * (np.arange(self.counts.size) + 0.5)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def scaled(self, factor: int) -> "DeltaTHistogram":
        return DeltaTHistogram(self.bin_width_ps, self.origin_ps, self.counts * factor,
                               self.underflow * factor, self.overflow * factor)


def extract_time(pulse: CapturedPulse, fraction: float = 0.5) -> TimeTag:
    """Constant-fraction timestamp of a captured pulse.

    The level is ``fraction`` times the largest code in the window; the
    crossing is linearly interpolated between the last sample below the
    level before the peak and its successor.
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"fraction must lie in (0, 1), got {fraction}")
    s = np.asarray(pulse.samples, dtype=float)
    p = int(np.argmax(s))
    peak = s[p]
    if peak <= 0:
        raise ExtractionError("window has no positive peak")
    level = fraction * peak
    below = np.flatnonzero(s[:p] < level)
    if below.size == 0:
        raise ExtractionError("no leading-edge crossing inside the window")
    i = int(below[-1])
    offset = i + (level - s[i]) / (s[i + 1] - s[i])
    return TimeTag(pulse.channel, (pulse.coarse_tag - pulse.pretrigger + offset) * (1e12 / pulse.sample_rate_hz))


def extract_times(pulses, fraction: float = 0.5) -> tuple[np.ndarray, int]:
    """Timestamps (ps) for every pulse that yields one, plus the failure count."""
    times = []
    failures = 0
    for p in pulses:
        try:
            times.append(extract_time(p, fraction).time_ps)
        except ExtractionError:
            failures += 1
    return np.asarray(times, dtype=float), failures


def _times(tags) -> np.ndarray:
    if isinstance(tags, np.ndarray):
        return tags.astype(float, copy=False)
    return np.asarray([getattr(t, "time_ps", t) for t in tags], dtype=float)


def build_coincidences(tags_a, tags_b, window_ps: float = DEFAULT_WINDOW_PS) -> np.ndarray:
    """All Δt = t_b - t_a with |Δt| <= window_ps, ordered by (a index, b index).

    Every pair inside the window is reported; there is no one-to-one matching.
    """
    a = _times(tags_a)
    b = _times(tags_b)
    for name, x in (("A", a), ("B", b)):
        if x.size > 1 and np.any(np.diff(x) < 0):
            raise ContractError(f"channel {name} tags are not sorted by time")
    if a.size == 0 or b.size == 0:
        return np.zeros(0)
    # search bounds padded by a rounding-error margin, then filtered exactly on b - a
    slack = 8.0 * np.finfo(float).eps * (np.abs(a) + window_ps + np.max(np.abs(b)))
    lo = np.searchsorted(b, a - window_ps - slack, side="left")
    hi = np.searchsorted(b, a + window_ps + slack, side="right")
    counts = np.maximum(hi - lo, 0)
    if counts.sum() == 0:
        return np.zeros(0)
    a_idx = np.repeat(np.arange(a.size), counts)
    starts = np.repeat(lo - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    b_idx = starts + np.arange(counts.sum())
    dt = b[b_idx] - a[a_idx]
    return dt[np.abs(dt) <= window_ps]


def histogram(deltas, bin_width_ps: float, origin_ps: float, n_bins: int) -> DeltaTHistogram:
    """Left-closed binning ``[origin + i*w, origin + (i+1)*w)``; out-of-range values are tallied."""
    if not bin_width_ps > 0:
        raise ConfigError("bin width must be positive")
    if n_bins < 1:
        raise ConfigError("n_bins must be >= 1")
    x = np.asarray(deltas, dtype=float)
    idx = np.floor((x - origin_ps) / bin_width_ps)
    under = int(np.sum(idx < 0))
    over = int(np.sum(idx >= n_bins))
    inside = idx[(idx >= 0) & (idx < n_bins)].astype(np.int64)
    counts = np.bincount(inside, minlength=n_bins).astype(np.int64)
    return DeltaTHistogram(float(bin_width_ps), float(origin_ps), counts, under, over)


def symmetric_histogram(deltas, bin_width_ps: float, half_range_ps: float,
                        center_ps: float = 0.0) -> DeltaTHistogram:
    """Histogram spanning ``center ± half_range`` in whole bins, with a bin edge at center ± k*w."""
    n_half = int(np.ceil(half_range_ps / bin_width_ps))
    return histogram(deltas, bin_width_ps, center_ps - n_half * bin_width_ps, 2 * n_half)
