"""Static SVG figures. Presentation only: nothing here feeds back into results."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed salt and no date stamp keep repeated runs byte-identical
_RC = {"svg.hashsalt": "qickpair", "svg.fonttype": "path"}


def _save(fig, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "qickpair"})
    plt.close(fig)


def plot_trace(path, t_ps, drive, optical):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(np.asarray(t_ps) / 1000.0, drive, label="RF drive (norm.)", lw=1)
    ax.plot(np.asarray(t_ps) / 1000.0, optical, label="optical intensity", lw=1)
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("amplitude")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path)


def plot_histogram(path, hist, title, fit_curve=None, xscale=1.0, xlabel="Δt (ps)"):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.step(hist.centers / xscale, hist.counts, where="mid", lw=0.8)
    if fit_curve is not None:
        ax.plot(hist.centers / xscale, fit_curve, "r-", lw=1, label="Gaussian fit")
        ax.legend(loc="upper right")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("counts")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_visibility(path, phases, counts, fit):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(phases, counts, "o", label="coincidences")
    fine = np.linspace(min(phases), max(phases), 200)
    ax.plot(fine, fit.model(fine), "-", label=f"fit, V = {fit.visibility:.3f}")
    ax.set_xlabel("phase (rad)")
    ax.set_ylabel("coincidence counts")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path)
