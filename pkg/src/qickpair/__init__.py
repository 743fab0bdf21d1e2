"""Simulator and signal-processing toolkit for an RFSoC-driven entangled photon-pair bench."""

from .analysis import CarResult, GaussianFit, SinusoidFit, compute_car, fit_gaussian, fit_sinusoid
from .config import ExperimentConfig, load_config, parse_config
from .detector import SnspdConfig, render_channel, synthesize_pulse
from .errors import ConfigError, ContractError, ExtractionError, FitError
from .photonics import (Detection, Detections, MzmConfig, SourceConfig, extinction_ratio_db,
                        interferometer_table, mzm_transmission, simulate_pairs,
                        simulate_visibility_scan)
from .pulsegen import (AnalogWaveform, DacPattern, SampleGrid, make_double_pulse, render_pattern,
                       smooth_rf, tick_duration_ps)
from .readout import AdcConfig, CapturedPulse, QbufConfig, digitize, qbuf_capture
from .tagging import DeltaTHistogram, TimeTag, build_coincidences, extract_time, histogram
from .tagio import read_captures, read_tags, write_captures, write_tags

__version__ = "0.1.0"
