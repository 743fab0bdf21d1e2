"""Figures of merit: CAR, Gaussian timing resolution, sinusoidal visibility."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import ConfigError, FitError
from .tagging import DeltaTHistogram


@dataclass(frozen=True)
class CarResult:
    car: float
    peak_counts: int
    accidental_mean: float
    peak_center_ps: float
    peak_halfwidth_ps: float
    car_stderr: float = math.nan
    infinite: bool = False


@dataclass(frozen=True)
class GaussianFit:
    mu_ps: float
    sigma_ps: float
    amplitude: float
    fit_rms_residual: float
    sigma_stderr_ps: float = math.nan
    iterations: int = 0


@dataclass(frozen=True)
class SinusoidFit:
    mean_level: float
    visibility: float
    phase0_rad: float
    fit_rms_residual: float
    visibility_stderr: float = math.nan
    clamped: bool = False

    def model(self, phases):
        phases = np.asarray(phases, dtype=float)
        return self.mean_level * (1.0 + self.visibility * np.cos(phases + self.phase0_rad))


def _window_mask(centers, center, halfwidth):
    return np.abs(centers - center) <= halfwidth


def compute_car(hist: DeltaTHistogram, peak_center_ps: float, peak_halfwidth_ps: float,
                rep_period_ps: float, n_side_windows: int = 4) -> CarResult:
    """Peak-window counts over the mean of side windows at ``center ± k*rep_period``.

    A bin belongs to a window when its centre lies within the half-width.
    If a side window holds a different number of bins than the peak (bin
    grid not commensurate with the period), its counts are rescaled to the
    peak's bin count.
    """
    if n_side_windows < 1:
        raise ConfigError("n_side_windows must be >= 1")
    if not peak_halfwidth_ps > 0 or not rep_period_ps > 0:
        raise ConfigError("peak half-width and repetition period must be positive")
    c = hist.centers
    lo_edge, hi_edge = hist.edges[0], hist.edges[-1]
    peak_mask = _window_mask(c, peak_center_ps, peak_halfwidth_ps)
    n_peak_bins = int(peak_mask.sum())
    if n_peak_bins == 0:
        raise ConfigError("peak window contains no histogram bins")
    peak = int(hist.counts[peak_mask].sum())

    side = []
    for k in range(1, n_side_windows + 1):
        for sign in (-1, 1):
            center = peak_center_ps + sign * k * rep_period_ps
            if center - peak_halfwidth_ps < lo_edge or center + peak_halfwidth_ps > hi_edge:
                raise ConfigError(f"side window at {center:.1f} ps lies outside the histogram")
            m = _window_mask(c, center, peak_halfwidth_ps)
            side.append(hist.counts[m].sum() * n_peak_bins / m.sum())
    side_total = float(np.sum(side))
    acc = side_total / len(side)
    if acc == 0.0:
        return CarResult(math.inf, peak, 0.0, peak_center_ps, peak_halfwidth_ps, math.nan, True)
    car = peak / acc
    rel = math.sqrt((1.0 / peak if peak else 0.0) + 1.0 / side_total)
    return CarResult(car, peak, acc, peak_center_ps, peak_halfwidth_ps, car * rel, False)


def _gauss(p, x):
    a, mu, sigma = p
    return a * np.exp(-0.5 * ((x - mu) / sigma) ** 2)


def fit_gaussian(hist: DeltaTHistogram, max_iterations: int = 200, rtol: float = 1e-9) -> GaussianFit:
    """Unweighted least-squares Gaussian fit to bin counts, seeded from sample moments."""
    y = hist.counts.astype(float)
    x = hist.centers
    nonzero = int(np.count_nonzero(y))
    if nonzero < 5:
        raise FitError(f"need at least 5 nonzero bins, got {nonzero}", nonzero_bins=nonzero)
    w = y / y.sum()
    mu0 = float(np.sum(w * x))
    sigma0 = float(math.sqrt(max(np.sum(w * (x - mu0) ** 2), (hist.bin_width_ps / 2) ** 2)))
    p0 = np.array([y.max(), mu0, sigma0])
    res = least_squares(lambda p: _gauss(p, x) - y, p0, method="lm",
                        xtol=rtol, ftol=1e-15, gtol=1e-15, max_nfev=max_iterations * 4)
    if not res.success or res.status == 0:
        raise FitError("Gaussian fit did not converge", status=res.status, message=res.message,
                       nfev=res.nfev, start=p0.tolist())
    a, mu, sigma = res.x
    sigma = abs(sigma)
    dof = max(1, x.size - 3)
    rss = float(np.sum(res.fun ** 2))
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * rss / dof
        sigma_err = float(math.sqrt(max(cov[2, 2], 0.0)))
    except np.linalg.LinAlgError:
        sigma_err = math.nan
    if not (a > 0 and sigma > 0):
        raise FitError("Gaussian fit returned a non-physical shape", params=res.x.tolist())
    return GaussianFit(float(mu), float(sigma), float(a), math.sqrt(rss / x.size), sigma_err, int(res.nfev))


def fit_sinusoid(phases_rad, counts) -> SinusoidFit:
    """Fit C(φ) = m (1 + V cos(φ + φ0)) through its linear form m + a cosφ + b sinφ."""
    phi = np.asarray(phases_rad, dtype=float)
    y = np.asarray(counts, dtype=float)
    if phi.size != y.size or phi.size < 4:
        raise FitError("need at least 4 (phase, count) points of equal length")
    if np.ptp(phi) <= math.pi:
        raise FitError("phases must span more than pi")
    X = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    if np.linalg.matrix_rank(X) < 3:
        raise FitError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    m, a, b = coef
    if not m > 0:
        raise FitError("fitted mean level is not positive", mean_level=float(m))
    resid = y - X @ coef
    rss = float(resid @ resid)
    amp = math.hypot(a, b)
    v = amp / m
    phase0 = math.atan2(-b, a)

    dof = phi.size - 3
    v_err = math.nan
    if dof > 0:
        cov = np.linalg.inv(X.T @ X) * rss / dof
        if amp > 0:
            grad = np.array([-amp / m ** 2, a / (amp * m), b / (amp * m)])
        else:
            grad = np.array([0.0, 1.0 / m, 0.0])
        v_err = float(math.sqrt(max(grad @ cov @ grad, 0.0)))
    clamped = v > 1.0
    return SinusoidFit(float(m), float(min(v, 1.0)), phase0, math.sqrt(rss / phi.size), v_err, bool(clamped))
