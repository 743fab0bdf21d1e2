"""Command line entry point.

    qickpair <experiment> --config <path> --seed <u64> --out <dir> [--mode tdc|fpga]

Exit status: 0 when the run meets its pass criterion, 1 when it does not,
2 on a configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .experiments import run_experiment

log = logging.getLogger("qickpair")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CHOICES = ("extinction", "car", "car-tdc", "car-fpga", "visibility", "resolution")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qickpair", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=CHOICES)
    p.add_argument("--config", help="INI experiment config (defaults used when omitted)")
    p.add_argument("--seed", type=_u64, help="master seed; overrides [experiment] master_seed")
    p.add_argument("--out", help="output directory; overrides [experiment] output_dir")
    p.add_argument("--mode", choices=("tdc", "fpga"), help="CAR readout path (car only)")
    p.add_argument("--save-raw", action="store_true", help="also write tag/capture files")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_experiment(arg: str, mode: str | None, configured: str) -> str:
    if arg == "car":
        name = f"car-{mode or 'tdc'}"
    else:
        if mode is not None and not arg.startswith("car"):
            raise ConfigError("--mode only applies to the car experiment")
        if mode is not None and arg != f"car-{mode}":
            raise ConfigError(f"--mode {mode} conflicts with experiment {arg}")
        name = arg
    if configured and configured != name:
        raise ConfigError(f"config is for experiment {configured!r}, not {name!r}")
    return name


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        name = resolve_experiment(args.experiment, args.mode, cfg.experiment.name)
        overrides = {"name": name}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.out is not None:
            overrides["output_dir"] = args.out
        cfg = cfg.with_run(**overrides)
        report = run_experiment(cfg, name, save_raw=args.save_raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{report.experiment}: {report.metric} = {report.value} "
          f"({report.comparison} {report.threshold}) {verdict}")
    for f in report.files:
        log.info("wrote %s", f)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
