"""Phenomenological optical chain: MZM, pair source, time-bin analysers.

EDFA and PPLN gains are folded into the mean pair number per pump pulse
(``mu``) and the per-arm detection efficiencies, so nothing here models
spectra or polarisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError
from .pulsegen import AnalogWaveform
from .rng import derive_seed

CHANNELS = ("A", "B")
EARLY, LATE = 0, 1
BIN_NAMES = ("early", "late")
NO_VALUE = -1


@dataclass(frozen=True)
class MzmConfig:
    v_pi: float = 1.0
    bias_rad: float = 0.0
    extinction_floor_db: float = 25.0

    def __post_init__(self):
        if not self.v_pi > 0:
            raise ConfigError(f"v_pi must be positive, got {self.v_pi}")
        if self.extinction_floor_db < 0:
            raise ConfigError("extinction_floor_db must be >= 0")

    @property
    def floor(self) -> float:
        return 10.0 ** (-self.extinction_floor_db / 10.0)


@dataclass(frozen=True)
class SourceConfig:
    mu: float = 0.0065
    eta_a: float = 0.5
    eta_b: float = 0.5
    dark_hz_a: float = 100.0
    dark_hz_b: float = 100.0
    jitter_sigma_ps: float = 30.0
    channel_offset_ps: float = 0.0
    rep_period_ps: float = 10_000.0
    bin_separation_ps: float = 1975.3
    v_intrinsic: float = 0.95

    def __post_init__(self):
        if self.mu < 0:
            raise ConfigError("mu must be >= 0")
        for name in ("eta_a", "eta_b", "v_intrinsic"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        for name in ("dark_hz_a", "dark_hz_b", "jitter_sigma_ps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not self.rep_period_ps > 0 or not self.bin_separation_ps > 0:
            raise ConfigError("rep_period_ps and bin_separation_ps must be positive")


class Detection(NamedTuple):
    """One truth-level detection; ``pair_id`` is None for dark counts."""

    channel: str
    time_ps: float
    pair_id: int | None = None
    bin: str | None = None
    slot: int | None = None

    @property
    def is_dark(self) -> bool:
        return self.pair_id is None


class Detections:
    """Column store of detections, sorted by (channel, time).

    Iterating yields :class:`Detection` records; the arrays are what the
    downstream numeric code uses.
    """

    def __init__(self, channel, time_ps, pair_id, bin_, slot):
        channel = np.asarray(channel, dtype=np.uint8)
        time_ps = np.asarray(time_ps, dtype=float)
        order = np.lexsort((time_ps, channel))
        self.channel = channel[order]
        self.time_ps = time_ps[order]
        self.pair_id = np.asarray(pair_id, dtype=np.int64)[order]
        self.bin = np.asarray(bin_, dtype=np.int8)[order]
        self.slot = np.asarray(slot, dtype=np.int8)[order]

    @classmethod
    def empty(cls) -> "Detections":
        return cls([], [], [], [], [])

    def __len__(self) -> int:
        return self.time_ps.size

    def __iter__(self) -> Iterator[Detection]:
        for c, t, p, b, s in zip(self.channel, self.time_ps, self.pair_id, self.bin, self.slot):
            yield Detection(
                CHANNELS[c], float(t),
                None if p == NO_VALUE else int(p),
                None if b == NO_VALUE else BIN_NAMES[b],
                None if s == NO_VALUE else int(s),
            )

    def times(self, channel: str) -> np.ndarray:
        return self.time_ps[self.channel == CHANNELS.index(channel)]

    def select(self, channel: str) -> "Detections":
        m = self.channel == CHANNELS.index(channel)
        return Detections(self.channel[m], self.time_ps[m], self.pair_id[m], self.bin[m], self.slot[m])


def mzm_transmission(drive: AnalogWaveform, cfg: MzmConfig) -> AnalogWaveform:
    eps = cfg.floor
    phase = np.pi * drive.values / (2.0 * cfg.v_pi) + cfg.bias_rad
    return drive.with_values((1.0 - eps) * np.sin(phase) ** 2 + eps)


def extinction_ratio_db(optical: AnalogWaveform, on_fraction: float) -> float:
    """Peak-to-floor ratio between the brightest and dimmest ``on_fraction`` of samples."""
    if not 0.0 < on_fraction < 0.5:
        raise ConfigError(f"on_fraction must lie in (0, 0.5), got {on_fraction}")
    v = np.sort(optical.values)
    if v[0] == v[-1]:
        return 0.0
    k = max(1, int(round(on_fraction * v.size)))
    low = v[:k].mean()
    high = v[-k:].mean()
    if low == 0.0:
        return math.inf
    return 10.0 * math.log10(high / low)


def _jitter(rng, n, sigma):
    if sigma == 0:
        return np.zeros(n)
    return rng.normal(0.0, sigma, n)


def _emit_pairs(cfg: SourceConfig, n_pulses: int, rng):
    """Draw all pairs of the run: returns (pulse index per pair) sorted by pulse."""
    # Poisson(mu) per pulse == Poisson(n*mu) total with uniform pulse assignment
    n_pairs = rng.poisson(cfg.mu * n_pulses) if n_pulses > 0 else 0
    pulses = np.sort(rng.integers(0, n_pulses, n_pairs)) if n_pairs else np.zeros(0, np.int64)
    return pulses


def _dark_counts(cfg: SourceConfig, span_ps: float, rng):
    chans, times = [], []
    for c, rate in enumerate((cfg.dark_hz_a, cfg.dark_hz_b)):
        n = rng.poisson(rate * span_ps * 1e-12) if span_ps > 0 else 0
        times.append(rng.uniform(0.0, span_ps, n))
        chans.append(np.full(n, c, np.uint8))
    return np.concatenate(chans), np.concatenate(times)


def _assemble(cfg, rng, n_pulses, pair_chan, pair_time, pair_ids, slots):
    dark_chan, dark_time = _dark_counts(cfg, n_pulses * cfg.rep_period_ps, rng)
    nd = dark_time.size
    return Detections(
        np.concatenate([pair_chan, dark_chan]),
        np.concatenate([pair_time, dark_time]),
        np.concatenate([pair_ids, np.full(nd, NO_VALUE)]),
        np.full(pair_time.size + nd, NO_VALUE),
        np.concatenate([slots, np.full(nd, NO_VALUE)]),
    )


def simulate_pairs(cfg: SourceConfig, n_pulses: int, seed: int) -> Detections:
    """Pair and dark detections for ``n_pulses`` pump pulses spaced ``rep_period_ps``."""
    if n_pulses < 0:
        raise ConfigError("n_pulses must be >= 0")
    rng = np.random.default_rng(seed)
    pulses = _emit_pairs(cfg, n_pulses, rng)
    n = pulses.size
    ids = np.arange(n)
    t_pulse = pulses * cfg.rep_period_ps
    det_a = rng.random(n) < cfg.eta_a
    det_b = rng.random(n) < cfg.eta_b
    t_a = t_pulse[det_a] + _jitter(rng, int(det_a.sum()), cfg.jitter_sigma_ps)
    t_b = t_pulse[det_b] + cfg.channel_offset_ps + _jitter(rng, int(det_b.sum()), cfg.jitter_sigma_ps)
    chan = np.concatenate([np.zeros(t_a.size, np.uint8), np.ones(t_b.size, np.uint8)])
    return _assemble(cfg, rng, n_pulses, chan, np.concatenate([t_a, t_b]),
                     np.concatenate([ids[det_a], ids[det_b]]), np.full(chan.size, NO_VALUE))


def _analyser(phase):
    # rows: output slot 0/1/2, columns: input bin early/late; amplitude 1/2 per arm
    e = np.exp(1j * phase) / 2.0
    return np.array([[0.5, 0.0], [e, 0.5], [0.0, e]])


def _state(v):
    psi = np.zeros(4, complex)
    psi[0] = psi[3] = 1 / math.sqrt(2.0)  # basis ee, el, le, ll
    mixed = np.zeros((4, 4))
    mixed[0, 0] = mixed[3, 3] = 0.5
    return v * np.outer(psi, psi.conj()) + (1.0 - v) * mixed


def interferometer_table(phase_a_rad: float, phase_b_rad: float, v_intrinsic: float) -> np.ndarray:
    """Joint slot probabilities P[s_a, s_b] behind two unbalanced Michelsons.

    The input is the phase-damped |ee>+|ll> state. Entries sum to less than
    one; the remainder is light leaving the unobserved interferometer ports.
    """
    if not 0.0 <= v_intrinsic <= 1.0:
        raise ConfigError("v_intrinsic must lie in [0, 1]")
    k = np.kron(_analyser(phase_a_rad), _analyser(phase_b_rad))
    p = np.einsum("ij,jk,ik->i", k, _state(v_intrinsic), k.conj()).real
    return np.clip(p, 0.0, None).reshape(3, 3)


def outcome_table(phase_a_rad: float, phase_b_rad: float, v_intrinsic: float) -> np.ndarray:
    """4x4 extension of :func:`interferometer_table`; index 3 means the photon was lost.

    Each photon alone is in an equal early/late mixture, so its detected
    marginal is (1/8, 1/4, 1/8) whatever the phases.
    """
    table = interferometer_table(phase_a_rad, phase_b_rad, v_intrinsic)
    marginal = np.array([0.125, 0.25, 0.125])
    out = np.zeros((4, 4))
    out[:3, :3] = table
    out[:3, 3] = marginal - table.sum(axis=1)
    out[3, :3] = marginal - table.sum(axis=0)
    out[3, 3] = 1.0 - out[:3, :].sum() - out[3, :3].sum()
    return np.clip(out, 0.0, None)


def simulate_interfered_pairs(cfg: SourceConfig, n_pulses: int, phase_a_rad: float,
                              phase_b_rad: float, seed: int) -> Detections:
    """Like :func:`simulate_pairs`, with each photon routed through its analyser.

    A detected photon arrives at pulse time + slot * bin_separation_ps.
    """
    rng = np.random.default_rng(seed)
    pulses = _emit_pairs(cfg, n_pulses, rng)
    n = pulses.size
    p = outcome_table(phase_a_rad, phase_b_rad, cfg.v_intrinsic).ravel()
    cell = rng.choice(16, size=n, p=p / p.sum())
    slot_a, slot_b = cell // 4, cell % 4
    det_a = (slot_a < 3) & (rng.random(n) < cfg.eta_a)
    det_b = (slot_b < 3) & (rng.random(n) < cfg.eta_b)
    t_pulse = pulses * cfg.rep_period_ps
    sep = cfg.bin_separation_ps
    t_a = t_pulse[det_a] + slot_a[det_a] * sep + _jitter(rng, int(det_a.sum()), cfg.jitter_sigma_ps)
    t_b = (t_pulse[det_b] + slot_b[det_b] * sep + cfg.channel_offset_ps
           + _jitter(rng, int(det_b.sum()), cfg.jitter_sigma_ps))
    ids = np.arange(n)
    chan = np.concatenate([np.zeros(t_a.size, np.uint8), np.ones(t_b.size, np.uint8)])
    return _assemble(cfg, rng, n_pulses, chan, np.concatenate([t_a, t_b]),
                     np.concatenate([ids[det_a], ids[det_b]]),
                     np.concatenate([slot_a[det_a], slot_b[det_b]]))


def count_slot_coincidences(dets: Detections, cfg: SourceConfig, slot: int = 1,
                            gate_halfwidth_ps: float = 500.0) -> int:
    """Coincidences where both channels fire in ``slot`` of the same pump pulse."""
    keys = []
    for ch, offset in (("A", 0.0), ("B", cfg.channel_offset_ps)):
        t = dets.times(ch) - offset - slot * cfg.bin_separation_ps
        k = np.round(t / cfg.rep_period_ps)
        inside = np.abs(t - k * cfg.rep_period_ps) <= gate_halfwidth_ps
        keys.append(k[inside].astype(np.int64))
    ua, ca = np.unique(keys[0], return_counts=True)
    ub, cb = np.unique(keys[1], return_counts=True)
    _, ia, ib = np.intersect1d(ua, ub, assume_unique=True, return_indices=True)
    return int(np.sum(ca[ia] * cb[ib]))


def simulate_visibility_scan(cfg: SourceConfig, phases_rad, n_pulses_per_point: int,
                             seed: int, gate_halfwidth_ps: float = 500.0) -> list[tuple[float, int]]:
    """Middle-slot coincidence counts while scanning analyser A's phase (B fixed at 0).

    Point ``i`` uses ``derive_seed(seed, i)`` so points are independent of
    evaluation order.
    """
    phases = [float(p) for p in phases_rad]
    if not phases:
        raise ConfigError("phase list must be non-empty")
    out = []
    for i, phase in enumerate(phases):
        dets = simulate_interfered_pairs(cfg, n_pulses_per_point, phase, 0.0, derive_seed(seed, i))
        out.append((phase, count_slot_coincidences(dets, cfg, 1, gate_halfwidth_ps)))
    return out
