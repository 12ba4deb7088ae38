"""Uplink scheduling by downlink power level modulation in wireless powered networks."""

from .baseline import era_objective, era_optimize
from .channel import ChannelRealization, Topology, path_loss_gain, sample_channel
from .optimizer import ProblemInstance, SolveOptions, SolveResult, oracle_grid_search, solve
from .physics import Schedule, SystemConfig, constraint_residuals, sum_rate
from .plm import decode_schedule, encode_schedule, max_alpha, max_users

__version__ = "0.1.0"
