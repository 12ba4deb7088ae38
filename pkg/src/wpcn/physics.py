"""Frame, energy and rate model of the harvest-then-transmit network.

Units are linear throughout: watts, joules, and a frame of unit duration over a
bandwidth normalized to 1 Hz (so a per-Hz power in dBm/Hz is a total power in
dBm). Rates are in nats/s/Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelRealization, Topology
from .errors import ConfigError, DomainError

FEASIBILITY_TOL = 1e-9


def dbm_to_watt(x):
    if np.ndim(x):
        return 10.0 ** ((np.asarray(x, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((float(x) - 30.0) / 10.0)


def watt_to_dbm(w):
    if np.ndim(w):
        w = np.asarray(w, dtype=float)
        if np.any(w <= 0):
            raise DomainError("power must be positive to express in dBm")
        return 10.0 * np.log10(w) + 30.0
    if not w > 0:
        raise DomainError(f"power must be positive to express in dBm, got {w}")
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one network.

    ``p_p`` below ``p_a`` is accepted here on purpose: the optimizer reports
    such a configuration as infeasible instead of refusing to build it.
    """

    topology: Topology
    p_a: float
    p_p: float
    alpha: float = 1.0
    eta: float = 0.5
    n0: float = 1e-19
    p_c: tuple[float, ...] = field(default=None)
    e_d: float | None = None

    def __post_init__(self):
        K = self.topology.K
        pc = (0.0,) * K if self.p_c is None else tuple(float(x) for x in np.broadcast_to(self.p_c, (K,)))
        object.__setattr__(self, "p_c", pc)
        for name in ("p_a", "p_p", "alpha", "eta", "n0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.p_a > 0:
            raise ConfigError(f"p_a must be > 0, got {self.p_a}")
        if not self.p_p > 0:
            raise ConfigError(f"p_p must be > 0, got {self.p_p}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError(f"eta must lie in (0, 1], got {self.eta}")
        if not self.n0 > 0:
            raise ConfigError(f"n0 must be > 0, got {self.n0}")
        if any(not c >= 0 for c in pc):
            raise ConfigError(f"p_c entries must be >= 0, got {pc}")
        if self.e_d is not None:
            object.__setattr__(self, "e_d", float(self.e_d))
            if not self.e_d > 0:
                raise ConfigError(f"e_d must be > 0, got {self.e_d}")

    @property
    def K(self) -> int:
        return self.topology.K

    @property
    def peak_ratio(self) -> float:
        return self.p_p / self.p_a

    @property
    def tau_d_max(self) -> float:
        """Upper bound on the downlink duration (1, or E_D / P_A when budgeted)."""
        if self.e_d is None:
            return 1.0
        return min(1.0, self.e_d / self.p_a)

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class Schedule:
    """One operating point of the frame.

    Only sign and length are checked on construction; whether the point
    satisfies the optimization constraints is :func:`constraint_residuals`'s job.
    """

    tau_d: float
    p_dl: np.ndarray
    tau_ul: np.ndarray
    p_ul: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau_d", float(self.tau_d))
        arrays = {}
        for name in ("p_dl", "tau_ul", "p_ul"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise DomainError(f"{name} must be 1-D")
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        if not (arrays["p_dl"].size == arrays["tau_ul"].size == arrays["p_ul"].size):
            raise DomainError("p_dl, tau_ul and p_ul must have equal length")
        if self.tau_d < 0 or any(np.any(a < 0) for a in arrays.values()):
            raise DomainError("schedule entries must be non-negative")

    @property
    def K(self) -> int:
        return self.p_dl.size

    def to_dict(self) -> dict:
        return {
            "tau_d": self.tau_d,
            "p_dl": self.p_dl.tolist(),
            "tau_ul": self.tau_ul.tolist(),
            "p_ul": self.p_ul.tolist(),
        }


def _check_K(K):
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")


def harvested_energy_subslot(h_dl_i, p_dl_j, tau_d, K, eta):
    """Energy user ``i`` collects in downlink subslot ``j`` (duration tau_d / K)."""
    _check_K(K)
    return eta * h_dl_i * p_dl_j * tau_d / K


def total_harvested(h_dl_i, p_dl, tau_d, K, eta):
    _check_K(K)
    p = np.asarray(p_dl, dtype=float)
    return eta * h_dl_i * tau_d * math.fsum(p) / K


def rate(tau_u, h_ul, p_ul, n0):
    """Achievable uplink rate ``tau_u * ln(1 + h p / N0)``; zero when tau_u is zero."""
    if not n0 > 0:
        raise DomainError(f"n0 must be > 0, got {n0}")
    tau_u = np.asarray(tau_u, dtype=float)
    r = tau_u * np.log1p(np.asarray(h_ul, dtype=float) * np.asarray(p_ul, dtype=float) / n0)
    r = np.where(tau_u == 0, 0.0, r)
    return float(r) if r.ndim == 0 else r


def _check_lengths(schedule: Schedule, channel: ChannelRealization, config: SystemConfig):
    if not (schedule.K == channel.K == config.K):
        raise DomainError(
            f"length mismatch: schedule K={schedule.K}, channel K={channel.K}, config K={config.K}"
        )


def sum_rate(schedule: Schedule, channel: ChannelRealization, config: SystemConfig) -> float:
    _check_lengths(schedule, channel, config)
    per_user = rate(schedule.tau_ul, channel.h_ul, schedule.p_ul, config.n0)
    return math.fsum(np.atleast_1d(per_user))


def c6_fraction_bound(p_dl, alpha, p_a):
    """Largest uplink share each user may take given the downlink levels.

    ``(p_i - (1 - alpha) P_A) / (alpha * sum(p))``; with ``alpha == 1`` this is
    the plain power ratio. Not defined for ``alpha == 0``.
    """
    p = np.asarray(p_dl, dtype=float)
    total = p.sum()
    if total <= 0:
        return np.zeros_like(p)
    return (p - (1.0 - alpha) * p_a) / (alpha * total)


@dataclass
class ResidualReport:
    """Signed residuals per constraint family (positive means violated).

    ``raw`` holds ``lhs - rhs``; ``scaled`` divides each entry by ``|rhs|``
    (or by 1 where the right-hand side is zero) and drives ``feasible``.
    """

    raw: dict[str, np.ndarray]
    scaled: dict[str, np.ndarray]
    max_residual: float
    feasible: bool
    tol: float

    def violated(self) -> list[str]:
        return [k for k, v in self.scaled.items() if np.any(v > self.tol)]


def _scale(rhs):
    rhs = np.abs(np.asarray(rhs, dtype=float))
    return np.where(rhs > 0, rhs, 1.0)


def constraint_residuals(
    schedule: Schedule,
    channel: ChannelRealization,
    config: SystemConfig,
    tol: float = FEASIBILITY_TOL,
) -> ResidualReport:
    """Evaluate every constraint of the sum-rate problem at ``schedule``.

    The uplink-share constraint takes the reduced-dynamic-range form for
    ``alpha < 1`` and the plain ratio form for ``alpha == 1``. At ``alpha == 0``
    it becomes the equal-split condition ``|tau_ul - (1 - tau_d) / K|``.
    """
    _check_lengths(schedule, channel, config)
    K = config.K
    s = schedule
    raw: dict[str, np.ndarray] = {}
    rhs: dict[str, np.ndarray] = {}

    def put(name, lhs, r):
        lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
        r = np.broadcast_to(np.asarray(r, dtype=float), lhs.shape)
        raw[name] = lhs - r
        rhs[name] = r

    put("C1_tau_d", -s.tau_d, 0.0)
    put("C1_tau_ul", -s.tau_ul, 0.0)
    put("C1_p_dl", -s.p_dl, 0.0)
    put("C1_p_ul", -s.p_ul, 0.0)
    put("C2_time", s.tau_d + math.fsum(s.tau_ul), 1.0)
    put("C3_average_power", math.fsum(s.p_dl), K * config.p_a)
    put("C4_peak_power", s.p_dl, config.p_p)
    harvested = np.array(
        [total_harvested(h, s.p_dl, s.tau_d, K, config.eta) for h in channel.h_dl]
    )
    consumed = (s.p_ul + np.asarray(config.p_c)) * s.tau_ul
    put("C5_energy", consumed, harvested)
    if config.alpha > 0:
        bound = c6_fraction_bound(s.p_dl, config.alpha, config.p_a) * (1.0 - s.tau_d)
        put("C6_uplink_share", s.tau_ul, bound)
    else:
        target = (1.0 - s.tau_d) / K
        lhs = np.abs(s.tau_ul - target)
        raw["C6_uplink_share"] = lhs
        rhs["C6_uplink_share"] = np.full(K, target)
    if config.e_d is not None:
        put("Eq1_downlink_budget", s.tau_d, config.e_d / config.p_a)

    scaled = {k: raw[k] / _scale(rhs[k]) for k in raw}
    worst = max(float(np.max(v)) for v in scaled.values())
    return ResidualReport(raw=raw, scaled=scaled, max_residual=worst, feasible=worst <= tol, tol=tol)
