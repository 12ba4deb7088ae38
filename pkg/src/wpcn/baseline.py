"""Equal resource allocation (ERA): the conventional comparison scheme.

The H-AP radiates the constant level ``P_A`` for the whole downlink and every
user gets the same uplink slot ``(1 - tau_d) / K``. Only ``tau_d`` is
optimized, which makes this the strongest baseline that needs no schedule
signalling.
"""

from __future__ import annotations

import math

import numpy as np

from ._search import grid_then_golden
from .channel import ChannelRealization
from .errors import DomainError
from .optimizer import INFEASIBLE, OPTIMAL, SolveResult
from .physics import Schedule, SystemConfig, constraint_residuals, sum_rate


def era_schedule(tau_d, channel: ChannelRealization, config: SystemConfig) -> Schedule:
    K = config.K
    slot = (1.0 - tau_d) / K
    energy = config.eta * channel.h_dl * config.p_a * tau_d
    if slot > 0:
        p_ul = np.maximum(energy / slot - np.asarray(config.p_c), 0.0)
    else:
        p_ul = np.zeros(K)
    return Schedule(tau_d=tau_d, p_dl=np.full(K, config.p_a), tau_ul=np.full(K, slot), p_ul=p_ul)


def era_objective(tau_d, channel: ChannelRealization, config: SystemConfig) -> float:
    if not 0.0 < tau_d < 1.0:
        raise DomainError(f"tau_d must lie in (0, 1), got {tau_d}")
    return sum_rate(era_schedule(tau_d, channel, config), channel, config)


def _era_value(tau, h_dl, h_ul, pc, config):
    slot = (1.0 - tau) / h_dl.size
    power = config.eta * h_dl * config.p_a * tau / slot - pc
    r = np.where(power > 0, slot * np.log1p(h_ul * np.maximum(power, 0.0) / config.n0), 0.0)
    return math.fsum(r)


def era_optimize(
    channel: ChannelRealization,
    config: SystemConfig,
    tol: float = 1e-7,
    n_grid: int = 64,
) -> SolveResult:
    """Best downlink duration for the equal split (grid, then golden section)."""
    if channel.K != config.K:
        raise DomainError(f"channel has {channel.K} users but config has {config.K}")
    pc = np.asarray(config.p_c)
    tau_max = config.tau_d_max
    hi = tau_max if tau_max < 1.0 else 1.0 - 1e-12
    tau, _, n = grid_then_golden(
        lambda t: _era_value(t, channel.h_dl, channel.h_ul, pc, config),
        1e-12 * tau_max,
        hi,
        n_grid=n_grid,
        tol=tol,
    )
    schedule = era_schedule(tau, channel, config)
    # check against the full-range constraint set; the point is feasible for
    # every alpha because its level ratios are all 1 / K
    report = constraint_residuals(schedule, channel, config.with_(alpha=1.0))
    return SolveResult(
        objective=sum_rate(schedule, channel, config),
        schedule=schedule,
        iterations=n,
        restarts_used=0,
        max_residual=report.max_residual,
        status=OPTIMAL if report.feasible else INFEASIBLE,
        info={"variant": "era"},
    )
