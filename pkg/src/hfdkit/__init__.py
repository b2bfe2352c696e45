"""Higuchi fractal dimension features for multichannel EEG, group statistics and classifiers."""

from .errors import HfdkitError, ValidationError
from .hfd import HfdParams, HfdVector, HfdWindowSeries, compute_features, curve_lengths, higuchi_fd
from .kmax import KmaxGrid, TuningReport, tune_kmax
from .signal import ChannelRegistry, Group, Recording, Style, TimeSeries, filter_channels, segment
from .stats import group_delta, one_sided_t, style_delta, top_n_channels, welch_t
from .synth import SynthSpec, expected_fd, generate, make_cohort

__version__ = "0.1.0"

__all__ = [
    "ChannelRegistry",
    "Group",
    "HfdParams",
    "HfdVector",
    "HfdWindowSeries",
    "HfdkitError",
    "KmaxGrid",
    "Recording",
    "Style",
    "SynthSpec",
    "TimeSeries",
    "TuningReport",
    "ValidationError",
    "compute_features",
    "curve_lengths",
    "expected_fd",
    "filter_channels",
    "generate",
    "group_delta",
    "higuchi_fd",
    "make_cohort",
    "one_sided_t",
    "segment",
    "style_delta",
    "top_n_channels",
    "tune_kmax",
    "welch_t",
]
