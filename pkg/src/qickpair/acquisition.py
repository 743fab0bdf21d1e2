"""Detector-to-timestamp readout chain over long, sparse detection streams.

A 0.1 s run at 2.5 Gsps is 2.5e8 samples per channel, almost all of them
baseline noise that never crosses the QBuf threshold. Only segments around
detections are rendered; each segment sits on the shared ADC clock grid so
coarse tags are indices into one continuous stream, and every pulse whose
tail reaches into a segment is included, so the segment samples equal those
of a full-length render (noise aside).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detector import TAIL_FALL_CONSTANTS, SnspdConfig, add_pulses, apply_dead_time
from .pulsegen import AnalogWaveform, SampleGrid
from .readout import AdcConfig, QbufConfig, digitize, qbuf_capture
from .tagging import extract_times

PRE_TRIGGER_SAMPLES = 8
# segment extends this many fall constants past its last pulse (~0.25% of peak)
POST_FALL_CONSTANTS = 6.0


@dataclass
class Segment:
    start_index: int
    waveform: AnalogWaveform


@dataclass
class ChannelReadout:
    channel: str
    times_ps: np.ndarray
    n_captures: int
    extraction_failures: int
    captures: list


def stream_origin_ps(all_times, dt_ps: float) -> float:
    """Start of the shared ADC stream: a grid point safely before the earliest detection."""
    t_min = min((float(np.min(t)) for t in all_times if len(t)), default=0.0)
    return (math.floor(t_min / dt_ps) - 2 * PRE_TRIGGER_SAMPLES) * dt_ps


def render_segments(times, cfg: SnspdConfig, dt_ps: float, origin_ps: float, seed,
                    pad_samples: int = 0) -> list[Segment]:
    """Render analog segments (mV) around sorted detection ``times``.

    ``pad_samples`` extends every segment past its decayed tail; passing the
    capture window length lets a trigger late in the tail complete its window,
    as it would in a continuous stream.
    """
    rng = np.random.default_rng(seed)
    times = np.asarray(times, dtype=float)
    amps = rng.uniform(cfg.amp_min_mv, cfg.amp_max_mv, times.size)
    keep = apply_dead_time(times, cfg.dead_time_ps)
    times, amps = times[keep], amps[keep]
    if times.size == 0:
        return []
    post = POST_FALL_CONSTANTS * cfg.fall_ps
    tail = TAIL_FALL_CONSTANTS * cfg.fall_ps
    breaks = np.flatnonzero(np.diff(times) > post) + 1
    starts = np.concatenate(([0], breaks))
    stops = np.concatenate((breaks, [times.size]))
    segments = []
    for s, e in zip(starts, stops):
        i0 = int(math.floor((times[s] - origin_ps) / dt_ps)) - PRE_TRIGGER_SAMPLES
        i1 = int(math.ceil((times[e - 1] + post - origin_ps) / dt_ps)) + pad_samples
        grid = SampleGrid(origin_ps + i0 * dt_ps, dt_ps, i1 - i0)
        lo = int(np.searchsorted(times, grid.t0_ps - tail, side="left"))
        values = np.zeros(grid.n)
        add_pulses(values, grid, times[lo:e], amps[lo:e], cfg)
        if cfg.noise_rms_mv > 0:
            values += rng.normal(0.0, cfg.noise_rms_mv, grid.n)
        segments.append(Segment(i0, AnalogWaveform(grid.t0_ps, dt_ps, values)))
    return segments


def read_segments(segments, adc: AdcConfig, qbuf: QbufConfig, channel: str, seed,
                  origin_ps: float, fraction: float = 0.5, keep_captures: bool = False) -> ChannelReadout:
    """Digitize, capture and timestamp every segment; returns absolute times in ps."""
    rng = np.random.default_rng(seed)
    captures = []
    for seg in segments:
        codes = digitize(seg.waveform, adc, rng)
        captures.extend(qbuf_capture(codes, qbuf, channel, adc.sample_rate_hz, seg.start_index))
    rel, failures = extract_times(captures, fraction)
    return ChannelReadout(channel, np.sort(origin_ps + rel), len(captures), failures,
                          captures if keep_captures else [])


def read_channel(times, snspd: SnspdConfig, adc: AdcConfig, qbuf: QbufConfig, channel: str,
                 origin_ps: float, render_seed, adc_seed, fraction: float = 0.5,
                 keep_captures: bool = False) -> ChannelReadout:
    segments = render_segments(times, snspd, adc.dt_ps, origin_ps, render_seed,
                               qbuf.window_len_samples)
    return read_segments(segments, adc, qbuf, channel, adc_seed, origin_ps, fraction, keep_captures)
