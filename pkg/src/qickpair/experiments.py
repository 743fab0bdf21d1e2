"""End-to-end runs of the five bench experiments.

Each runner writes CSV, JSON and SVG files into ``cfg.output_dir`` and
returns a :class:`Report`. All randomness flows from the master seed
through :func:`derive_seed`, one stream per stage, so outputs depend only
on (config, seed).
"""

from __future__ import annotations

import json
import math
from importlib import resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plots
from .acquisition import read_channel, read_segments, render_segments, stream_origin_ps
from .analysis import compute_car, fit_gaussian, fit_sinusoid
from .config import ExperimentConfig
from .errors import ConfigError, FitError
from .photonics import extinction_ratio_db, mzm_transmission, simulate_pairs, simulate_visibility_scan
from .pulsegen import DacPattern, make_double_pulse, render_pattern, smooth_rf
from .rng import derive_seed
from .tagging import TimeTag, build_coincidences, symmetric_histogram
from .tagio import write_captures, write_tags

SCHEMA_ID = "qickpair.report/1"


def load_schema() -> dict:
    """The JSON schema every emitted report validates against."""
    return json.loads(resources.files("qickpair").joinpath("report.schema.json").read_text())

# one derived stream per pipeline stage
STREAM_SOURCE = 1
STREAM_RENDER_A = 2
STREAM_RENDER_B = 3
STREAM_ADC_A = 4
STREAM_ADC_B = 5
STREAM_SCAN = 6


@dataclass
class Report:
    experiment: str
    seed: int
    passed: bool
    metric: str
    comparison: str
    threshold: float
    value: float | None
    results: dict
    files: list = field(default_factory=list)

    def to_json(self, cfg: ExperimentConfig) -> dict:
        return {
            "schema": SCHEMA_ID,
            "experiment": self.experiment,
            "seed": self.seed,
            "passed": self.passed,
            "criterion": {"metric": self.metric, "comparison": self.comparison,
                          "threshold": self.threshold, "value": self.value},
            "results": self.results,
            "config": cfg.to_dict(),
        }


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _finish(report: Report, cfg: ExperimentConfig, out: Path) -> Report:
    path = out / f"{report.experiment}.json"
    path.write_text(json.dumps(report.to_json(cfg), indent=2, sort_keys=True) + "\n")
    report.files.append(str(path))
    return report


def _outdir(cfg) -> Path:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_hist(path: Path, hist):
    rows = zip(hist.edges[:-1].tolist(), hist.centers.tolist(), hist.counts.tolist())
    _write_csv(path, ["bin_start_ps", "bin_center_ps", "count"], rows)


def build_pattern(cfg: ExperimentConfig) -> tuple[DacPattern, float]:
    dac = cfg.dac
    if dac.samples is not None:
        pattern = DacPattern(dac.samples, dac.sample_rate_hz, dac.rep_gap_ticks)
        return pattern, 1e12 / pattern.period_ps
    return make_double_pulse(dac.width_ps, dac.separation_ps, dac.target_rate_hz, dac.sample_rate_hz)


def run_extinction(cfg: ExperimentConfig) -> Report:
    out = _outdir(cfg)
    pattern, rate = build_pattern(cfg)
    drive = smooth_rf(render_pattern(pattern, cfg.dac.n_repetitions), cfg.dac.rf_fwhm_ps)
    optical = mzm_transmission(drive, cfg.mzm)
    on_fraction = cfg.analysis.on_fraction
    if on_fraction is None:
        lit = sum(1 for s in pattern.samples if s != 0.0)
        on_fraction = min(max(lit, 1) / pattern.period_samples, 0.49)
    er = extinction_ratio_db(optical, on_fraction)
    threshold = cfg.analysis.min_extinction_db

    trace = out / "extinction_trace.csv"
    _write_csv(trace, ["time_ps", "drive", "intensity"],
               zip(drive.times().tolist(), drive.values.tolist(), optical.values.tolist()))
    svg = out / "extinction.svg"
    plots.plot_trace(svg, drive.times(), drive.values, optical.values)

    report = Report("extinction", cfg.seed, er > threshold, "extinction_ratio_db", ">", threshold,
                    _finite(er), {
                        "extinction_ratio_db": _finite(er),
                        "on_fraction": on_fraction,
                        "achieved_rate_hz": rate,
                        "period_ps": pattern.period_ps,
                        "pattern_samples": list(pattern.samples),
                        "rep_gap_ticks": pattern.rep_gap_ticks,
                    }, [str(trace), str(svg)])
    return _finish(report, cfg, out)


def _car_histogram(cfg, deltas):
    a = cfg.analysis
    return symmetric_histogram(deltas, a.bin_width_ps, a.window_ps, center_ps=0.0)


def run_car(cfg: ExperimentConfig, mode: str = "tdc", save_raw: bool = False) -> Report:
    """CAR from truth tags (``tdc``) or from the emulated digitizer chain (``fpga``)."""
    if mode not in ("tdc", "fpga"):
        raise ConfigError(f"unknown CAR mode {mode!r}")
    out = _outdir(cfg)
    name = f"car-{mode}"
    src, a = cfg.source, cfg.analysis
    dets = simulate_pairs(src, cfg.experiment.n_pulses, derive_seed(cfg.seed, STREAM_SOURCE))
    t_a, t_b = dets.times("A"), dets.times("B")
    extra = {"detections_a": int(t_a.size), "detections_b": int(t_b.size)}
    files = []

    if mode == "fpga":
        origin = stream_origin_ps([t_a, t_b], cfg.adc.dt_ps)
        readouts = []
        for ch, times, rs, as_ in (("A", t_a, STREAM_RENDER_A, STREAM_ADC_A),
                                   ("B", t_b, STREAM_RENDER_B, STREAM_ADC_B)):
            readouts.append(read_channel(times, cfg.snspd, cfg.adc, cfg.qbuf, ch, origin,
                                         derive_seed(cfg.seed, rs), derive_seed(cfg.seed, as_),
                                         a.cfd_fraction, keep_captures=save_raw))
        ra, rb = readouts
        t_a, t_b = ra.times_ps, rb.times_ps
        extra.update({
            "captures_a": ra.n_captures, "captures_b": rb.n_captures,
            "tags_a": int(t_a.size), "tags_b": int(t_b.size),
            "extraction_failures": ra.extraction_failures + rb.extraction_failures,
        })
        if save_raw:
            path = out / f"{name}_captures.qcap"
            write_captures(path, ra.captures + rb.captures)
            files.append(str(path))

    if save_raw:
        path = out / f"{name}_tags.qtag"
        write_tags(path, [TimeTag("A", float(t)) for t in t_a] + [TimeTag("B", float(t)) for t in t_b])
        files.append(str(path))

    deltas = build_coincidences(t_a, t_b, a.window_ps)
    hist = _car_histogram(cfg, deltas)
    csv_path = out / f"{name}_histogram.csv"
    _write_hist(csv_path, hist)
    svg = out / f"{name}.svg"
    plots.plot_histogram(svg, hist, f"Δt histogram ({mode})", xscale=1000.0, xlabel="Δt (ns)")
    files += [str(csv_path), str(svg)]

    results = {"coincidences": int(deltas.size), **extra}
    if deltas.size == 0:
        results.update({"car": None, "no_coincidences": True})
        report = Report(name, cfg.seed, False, "car", ">=", a.min_car, None, results, files)
        return _finish(report, cfg, out)
    car = compute_car(hist, src.channel_offset_ps, a.peak_halfwidth_ps, src.rep_period_ps, a.n_side_windows)
    results.update({
        "car": _finite(car.car),
        "car_infinite": car.infinite,
        "car_stderr": _finite(car.car_stderr),
        "peak_counts": car.peak_counts,
        "accidental_mean": car.accidental_mean,
        "peak_center_ps": car.peak_center_ps,
        "peak_halfwidth_ps": car.peak_halfwidth_ps,
        "no_coincidences": False,
    })
    report = Report(name, cfg.seed, car.car >= a.min_car, "car", ">=", a.min_car,
                    _finite(car.car), results, files)
    return _finish(report, cfg, out)


def scan_phases(n: int) -> np.ndarray:
    return np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)


def run_visibility(cfg: ExperimentConfig) -> Report:
    out = _outdir(cfg)
    phases = scan_phases(cfg.experiment.n_phases)
    scan = simulate_visibility_scan(cfg.source, phases, cfg.experiment.n_pulses_per_point,
                                    derive_seed(cfg.seed, STREAM_SCAN), cfg.analysis.gate_halfwidth_ps)
    counts = [c for _, c in scan]
    csv_path = out / "visibility_scan.csv"
    _write_csv(csv_path, ["phase_rad", "coincidences"], [(float(p), c) for p, c in scan])
    threshold = cfg.analysis.min_visibility
    try:
        fit = fit_sinusoid(phases, counts)
    except FitError as exc:
        results = {"fit_error": str(exc), "counts": counts}
        report = Report("visibility", cfg.seed, False, "visibility", ">=", threshold, None,
                        results, [str(csv_path)])
        return _finish(report, cfg, out)
    svg = out / "visibility.svg"
    plots.plot_visibility(svg, phases, counts, fit)
    results = {
        "visibility": fit.visibility,
        "visibility_stderr": _finite(fit.visibility_stderr),
        "mean_level": fit.mean_level,
        "phase0_rad": fit.phase0_rad,
        "fit_rms_residual": fit.fit_rms_residual,
        "clamped": fit.clamped,
        "counts": counts,
    }
    report = Report("visibility", cfg.seed, fit.visibility >= threshold, "visibility", ">=",
                    threshold, fit.visibility, results, [str(csv_path), str(svg)])
    return _finish(report, cfg, out)


def split_signal_deltas(cfg: ExperimentConfig) -> tuple[np.ndarray, dict]:
    """Δt between two ADC channels fed the same analog SNSPD trace."""
    dets = simulate_pairs(cfg.source, cfg.experiment.n_pulses, derive_seed(cfg.seed, STREAM_SOURCE))
    times = dets.times("A")
    origin = stream_origin_ps([times], cfg.adc.dt_ps)
    segments = render_segments(times, cfg.snspd, cfg.adc.dt_ps, origin, derive_seed(cfg.seed, STREAM_RENDER_A),
                               cfg.qbuf.window_len_samples)
    f = cfg.analysis.cfd_fraction
    ra = read_segments(segments, cfg.adc, cfg.qbuf, "A", derive_seed(cfg.seed, STREAM_ADC_A), origin, f)
    rb = read_segments(segments, cfg.adc, cfg.qbuf, "B", derive_seed(cfg.seed, STREAM_ADC_B), origin, f)
    deltas = build_coincidences(ra.times_ps, rb.times_ps, cfg.analysis.resolution_window_ps)
    info = {"events": int(times.size), "tags_a": int(ra.times_ps.size), "tags_b": int(rb.times_ps.size),
            "extraction_failures": ra.extraction_failures + rb.extraction_failures}
    return deltas, info


def resolution_sigma(deltas, cfg: ExperimentConfig):
    """(sigma_ps, method, fit, hist); method is 'gaussian-fit' or 'sample-std' when bins are too few to fit."""
    a = cfg.analysis
    hist = symmetric_histogram(deltas, a.resolution_bin_ps, a.resolution_range_ps)
    try:
        fit = fit_gaussian(hist)
        return fit.sigma_ps, "gaussian-fit", fit, hist
    except FitError:
        sigma = float(np.std(deltas)) if len(deltas) else math.nan
        return sigma, "sample-std", None, hist


def run_resolution(cfg: ExperimentConfig) -> Report:
    out = _outdir(cfg)
    deltas, info = split_signal_deltas(cfg)
    sigma, method, fit, hist = resolution_sigma(deltas, cfg)
    csv_path = out / "resolution_histogram.csv"
    _write_hist(csv_path, hist)
    svg = out / "resolution.svg"
    curve = None
    if fit is not None:
        curve = fit.amplitude * np.exp(-0.5 * ((hist.centers - fit.mu_ps) / fit.sigma_ps) ** 2)
    plots.plot_histogram(svg, hist, "split-signal Δt", fit_curve=curve)
    results = {
        "sigma_ps": _finite(sigma),
        "method": method,
        "coincidences": int(len(deltas)),
        "sample_std_ps": _finite(np.std(deltas)) if len(deltas) else None,
        **info,
    }
    if fit is not None:
        results.update({"mu_ps": fit.mu_ps, "sigma_stderr_ps": _finite(fit.sigma_stderr_ps),
                        "amplitude": fit.amplitude, "fit_rms_residual": fit.fit_rms_residual})
    threshold = cfg.analysis.max_resolution_ps
    passed = len(deltas) > 0 and math.isfinite(sigma) and sigma <= threshold
    report = Report("resolution", cfg.seed, passed, "sigma_ps", "<=", threshold, _finite(sigma),
                    results, [str(csv_path), str(svg)])
    return _finish(report, cfg, out)


def run_experiment(cfg: ExperimentConfig, name: str, save_raw: bool = False) -> Report:
    if name == "extinction":
        return run_extinction(cfg)
    if name in ("car-tdc", "car-fpga"):
        return run_car(cfg, name.split("-")[1], save_raw)
    if name == "visibility":
        return run_visibility(cfg)
    if name == "resolution":
        return run_resolution(cfg)
    raise ConfigError(f"unknown experiment {name!r}")
