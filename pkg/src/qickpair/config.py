"""INI-style experiment configuration.

Grammar: ``[section]`` headers followed by ``key = value`` lines; ``#`` and
``;`` start comments. Every section and key is optional and falls back to
its default, but unknown sections or keys are errors. Values are parsed
according to the target field type; list values are comma separated.
See README.md for the full key list.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .detector import SnspdConfig
from .errors import ConfigError
from .photonics import MzmConfig, SourceConfig
from .pulsegen import DEFAULT_DAC_RATE_HZ
from .readout import AdcConfig, QbufConfig

EXPERIMENTS = ("extinction", "car-tdc", "car-fpga", "visibility", "resolution")


@dataclass(frozen=True)
class RunConfig:
    name: str = ""
    master_seed: int = 0
    output_dir: str = "out"
    n_pulses: int = 10_000_000
    n_pulses_per_point: int = 4_000_000
    n_phases: int = 12

    def __post_init__(self):
        if self.name and self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; expected one of {', '.join(EXPERIMENTS)}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.n_pulses < 0 or self.n_pulses_per_point < 0:
            raise ConfigError("pulse counts must be >= 0")
        if self.n_phases < 4:
            raise ConfigError("n_phases must be >= 4")


@dataclass(frozen=True)
class DacConfig:
    sample_rate_hz: float = DEFAULT_DAC_RATE_HZ
    width_ps: float = 200.0
    separation_ps: float = 1975.0
    target_rate_hz: float = 100e6
    # widens the 2-sample (246.9 ps) drive pulse to 250 ps FWHM
    rf_fwhm_ps: float = 127.6
    n_repetitions: int = 3
    # explicit pattern; overrides the double-pulse parameters when set
    samples: typing.Optional[tuple] = None
    rep_gap_ticks: int = 0

    def __post_init__(self):
        if self.n_repetitions < 1:
            raise ConfigError("n_repetitions must be >= 1")
        if self.rf_fwhm_ps < 0:
            raise ConfigError("rf_fwhm_ps must be >= 0")


@dataclass(frozen=True)
class AnalysisConfig:
    window_ps: float = 100_000.0
    bin_width_ps: float = 50.0
    peak_halfwidth_ps: float = 500.0
    n_side_windows: int = 4
    cfd_fraction: float = 0.5
    on_fraction: typing.Optional[float] = None
    gate_halfwidth_ps: float = 500.0
    resolution_bin_ps: float = 0.5
    resolution_window_ps: float = 1000.0
    resolution_range_ps: float = 50.0
    min_extinction_db: float = 20.0
    min_car: float = 100.0
    min_visibility: float = 0.9
    max_resolution_ps: float = 10.0

    def __post_init__(self):
        for name in ("window_ps", "bin_width_ps", "peak_halfwidth_ps", "gate_halfwidth_ps",
                     "resolution_bin_ps", "resolution_window_ps", "resolution_range_ps"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_side_windows < 1:
            raise ConfigError("n_side_windows must be >= 1")
        if not 0 < self.cfd_fraction < 1:
            raise ConfigError("cfd_fraction must lie in (0, 1)")
        if self.on_fraction is not None and not 0 < self.on_fraction < 0.5:
            raise ConfigError("on_fraction must lie in (0, 0.5)")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: RunConfig = field(default_factory=RunConfig)
    dac: DacConfig = field(default_factory=DacConfig)
    mzm: MzmConfig = field(default_factory=MzmConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    snspd: SnspdConfig = field(default_factory=SnspdConfig)
    adc: AdcConfig = field(default_factory=AdcConfig)
    qbuf: QbufConfig = field(default_factory=QbufConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @property
    def seed(self) -> int:
        return self.experiment.master_seed

    @property
    def output_dir(self) -> Path:
        return Path(self.experiment.output_dir)

    def replace(self, **sections) -> "ExperimentConfig":
        return dataclasses.replace(self, **sections)

    def with_run(self, **kwargs) -> "ExperimentConfig":
        return dataclasses.replace(self, experiment=dataclasses.replace(self.experiment, **kwargs))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


SECTIONS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _section_types():
    hints = typing.get_type_hints(ExperimentConfig)
    return {name: hints[name] for name in SECTIONS}


def _parse_value(raw: str, hint):
    raw = raw.strip()
    origin = typing.get_origin(hint)
    if origin is typing.Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if raw.lower() in ("", "none"):
            return None
        return _parse_value(raw, args[0])
    if hint is bool:
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if hint is int:
        f = float(raw)
        if not f.is_integer():
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(raw) if re.fullmatch(r"[+-]?\d+", raw) else int(f)
    if hint is float:
        return float(raw)
    if hint is tuple or origin is tuple:
        return tuple(float(x) for x in raw.split(",") if x.strip())
    return raw


def _line_numbers(text: str) -> dict:
    lines = {}
    section = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = i
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), i)
    return lines


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    lines = _line_numbers(text)
    types = _section_types()
    sections = {}
    for name in parser.sections():
        where = f"{source}:{lines.get((name, None), '?')}"
        if name not in SECTIONS:
            raise ConfigError(f"{where}: unknown section [{name}]")
        cls = types[name]
        hints = typing.get_type_hints(cls)
        kwargs = {}
        for key, raw in parser.items(name):
            where = f"{source}:{lines.get((name, key), '?')}"
            if key not in hints:
                raise ConfigError(f"{where}: unknown key {key!r} in [{name}]")
            try:
                kwargs[key] = _parse_value(raw, hints[key])
            except ValueError as exc:
                raise ConfigError(f"{where}: bad value for {name}.{key}: {exc}") from exc
        try:
            sections[name] = cls(**kwargs)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lines.get((name, None), '?')}: [{name}] {exc}") from exc
    return ExperimentConfig(**sections)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
