"""Log-domain representation of a schedule and its constraint set.

Substituting ``tau = exp(t)`` and ``P = exp(p)`` turns the products in the
energy and share constraints into sums of exponentials. The energy
constraint is checked as a log-sum-exp comparison::

    log(exp(p_ul_i + t_ul_i) + pc_i exp(t_ul_i))
        <= logsumexp_j(p_dl_j + t_d + log(eta h_i / K))

and the share constraint in a form normalized by the user's own level::

    alpha * sum_j exp(t_ul_i + p_dl_j - p_dl_i)
        <= (1 - (1 - alpha) P_A exp(-p_dl_i)) * (1 - exp(t_d))

which for ``alpha == 1`` reads ``sum_j exp(t_ul_i + p_dl_j - p_dl_i) + exp(t_d) <= 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .physics import FEASIBILITY_TOL, ResidualReport, Schedule


@dataclass(frozen=True)
class TransformedPoint:
    t_d: float
    t_ul: np.ndarray
    p_dl_log: np.ndarray
    p_ul_log: np.ndarray


def to_transformed(schedule: Schedule) -> TransformedPoint:
    s = schedule
    if s.tau_d <= 0 or np.any(s.tau_ul <= 0) or np.any(s.p_dl <= 0) or np.any(s.p_ul <= 0):
        raise DomainError("log transform needs every schedule entry to be > 0")
    return TransformedPoint(
        t_d=float(np.log(s.tau_d)),
        t_ul=np.log(s.tau_ul),
        p_dl_log=np.log(s.p_dl),
        p_ul_log=np.log(s.p_ul),
    )


def from_transformed(point: TransformedPoint) -> Schedule:
    return Schedule(
        tau_d=float(np.exp(point.t_d)),
        p_dl=np.exp(point.p_dl_log),
        tau_ul=np.exp(point.t_ul),
        p_ul=np.exp(point.p_ul_log),
    )


def _logsumexp(a):
    m = np.max(a)
    if not np.isfinite(m):
        return m
    return m + np.log(np.sum(np.exp(a - m)))


def transformed_constraint_residuals(point, problem, tol=FEASIBILITY_TOL) -> ResidualReport:
    """Residuals of the log-domain constraint set; positive means violated.

    Each family is reported relative to its right-hand side (``lhs / rhs - 1``)
    or, for the energy constraint, as a difference of logarithms, so signs line
    up one-to-one with :func:`wpcn.physics.constraint_residuals`.
    """
    cfg, ch = problem.config, problem.channel
    K, alpha = cfg.K, cfg.alpha
    t_d, t_ul = point.t_d, np.asarray(point.t_ul, dtype=float)
    p_dl, p_ul = np.asarray(point.p_dl_log, dtype=float), np.asarray(point.p_ul_log, dtype=float)
    if not (t_ul.size == p_dl.size == p_ul.size == K):
        raise DomainError("transformed point does not match the problem size")
    pc = np.asarray(cfg.p_c)

    res = {}
    res["C2_time"] = np.atleast_1d(np.exp(t_d) + np.exp(t_ul).sum() - 1.0)
    res["C3_average_power"] = np.atleast_1d(np.exp(p_dl).sum() / (K * cfg.p_a) - 1.0)
    res["C4_peak_power"] = np.exp(p_dl) / cfg.p_p - 1.0

    with np.errstate(divide="ignore"):
        log_coef = np.log(cfg.eta * ch.h_dl / K)
    lhs5 = np.logaddexp(p_ul + t_ul, np.log(pc, where=pc > 0, out=np.full(K, -np.inf)) + t_ul)
    rhs5 = np.array([_logsumexp(p_dl + t_d + c) for c in log_coef])
    res["C5_energy"] = np.where(np.isfinite(rhs5), lhs5 - rhs5, np.inf)

    spread = np.exp(t_ul[:, None] + p_dl[None, :] - p_dl[:, None]).sum(axis=1)
    headroom = (1.0 - (1.0 - alpha) * cfg.p_a * np.exp(-p_dl)) * (1.0 - np.exp(t_d))
    res["C6_uplink_share"] = alpha * spread - headroom

    worst = max(float(np.max(v)) for v in res.values())
    return ResidualReport(raw=res, scaled=res, max_residual=worst, feasible=worst <= tol, tol=tol)
