"""Simulation and analysis of White Rabbit time transfer over long fibre links."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("wrsim")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .analysis import Analysis, analyze_log
from .asymmetry import AsymmetryConfig, alpha_n_to_alpha, alpha_to_alpha_n, alpha_range, predicted_skew
from .errors import *  # noqa: F401,F403
from .noise import NoiseComponent, NoiseSpec, fit_noise_mixture, synthesize
from .optical import (BandpassFilter, ChannelProfile, EdfaModel, FibreSegment, SfpModel, channel_loss,
                      edfa_output, link_budget)
from .pps import TimestampLog, detect_dropouts, longest_clean_segment, pair_pps
from .scenarios import replay_configurations
from .sim import DropoutProcess, SimOutput, SimScenario, run
from .stability import Statistic, TimeErrorSeries, adev, mtie, stability_curve, tdev
