"""Independent reference implementations the package is checked against.

Each oracle is written from the physical definition, deliberately avoiding
the code paths used in the package.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf


def rect_gauss_fwhm(width_ps: float, kernel_fwhm_ps: float) -> float:
    """FWHM of a unit rectangle of ``width_ps`` convolved with a Gaussian (closed form)."""
    s = kernel_fwhm_ps / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    root2s = s * math.sqrt(2.0)

    def y(t):
        return 0.5 * (erf((t + width_ps / 2) / root2s) - erf((t - width_ps / 2) / root2s))

    half = y(0.0) / 2.0
    return 2.0 * brentq(lambda t: y(t) - half, 0.0, 10.0 * (width_ps + kernel_fwhm_ps))


def slot_amplitudes(phase: float) -> dict:
    """Amplitude for an early/late photon to leave an unbalanced interferometer in slot 0/1/2."""
    return {
        "e": {0: 0.5, 1: cmath.exp(1j * phase) / 2.0, 2: 0.0},
        "l": {0: 0.0, 1: 0.5, 2: cmath.exp(1j * phase) / 2.0},
    }


def table_by_amplitude_sums(phase_a: float, phase_b: float, v: float) -> np.ndarray:
    """Slot-pair probabilities from explicit path sums.

    The coherent part adds the |ee> and |ll> amplitudes before squaring; the
    dephased part adds their probabilities. The result mixes them with weight V.
    """
    amp_a = slot_amplitudes(phase_a)
    amp_b = slot_amplitudes(phase_b)
    out = np.zeros((3, 3))
    for sa in range(3):
        for sb in range(3):
            ee = amp_a["e"][sa] * amp_b["e"][sb]
            ll = amp_a["l"][sa] * amp_b["l"][sb]
            coherent = abs((ee + ll) / math.sqrt(2.0)) ** 2
            incoherent = 0.5 * (abs(ee) ** 2 + abs(ll) ** 2)
            out[sa, sb] = v * coherent + (1.0 - v) * incoherent
    return out


def qbuf_scan(codes, threshold: int, window: int, pretrigger: int = 0):
    """Sample-by-sample capture state machine: list of (trigger index, window codes)."""
    codes = list(codes)
    n = len(codes)
    out = []
    i = pretrigger
    while i < n:
        if codes[i] > threshold:
            start = i - pretrigger
            if start + window > n:
                break
            out.append((i, codes[start:start + window]))
            i += window
        else:
            i += 1
    return out


def coincidences_bruteforce(a, b, window: float) -> np.ndarray:
    """All b - a within the window from the full difference matrix, row-major order."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        return np.zeros(0)
    d = b[None, :] - a[:, None]
    return d[np.abs(d) <= window]


def car_small_mu(mu: float, eta_a: float, eta_b: float) -> float:
    """Coincidence-to-accidental ratio for Poisson pairs, negligible darks."""
    p_true = mu * eta_a * eta_b
    p_acc = (mu * eta_a) * (mu * eta_b)
    return 1.0 + p_true / p_acc


def slot_rate_expectation(mu: float, eta_a: float, eta_b: float, v: float, phase_sum: float) -> float:
    """Expected middle-slot coincidences per pump pulse: same-pair term plus multi-pair accidentals."""
    same_pair = mu * eta_a * eta_b * (1.0 + v * math.cos(phase_sum)) / 16.0
    # two distinct pairs in one pulse, each photon landing in the middle slot with prob 1/4
    cross_pair = (mu * eta_a / 4.0) * (mu * eta_b / 4.0)
    return same_pair + cross_pair
