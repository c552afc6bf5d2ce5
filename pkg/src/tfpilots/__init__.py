"""Zadoff-Chu pilots for delay-Doppler channel estimation with twisted convolution."""

from .channel import (ChannelError, DDChannel, DDChannelConfig, TruthOutsideGrid, apply_channel,
                      noise_variance, sample_channel)
from .estimator import EstimationResult, appendix_oracle_q, estimate_dd, filter_output
from .grid import ComplexGrid, GridIndex, energy, load_grid, parse_grid, write_grid
from .scenario import ScenarioConfig, SweepResult, desk_preset, nmse, paper_preset, run_sweep
from .sigops import (conv2d, discrete_caf, linear_acf2d, linear_xcorr, matched_filter_gamma,
                     periodic_xcorr, twisted_acf, twisted_conv)
from .zc import PilotError, PilotSpec, make_pilot, zc_sequence

__version__ = "0.1.0"
