"""Sum-rate maximization with power-level-modulated uplink scheduling.

The decision variables are the downlink duration ``tau_d`` and the ``K``
downlink levels. Everything else follows once the energy constraint and the
uplink-share constraint are taken with equality: the levels fix each user's
uplink share, the total downlink energy fixes what each user can spend, and
each user spends all of it in its slot.

:func:`solve` searches ``tau_d`` on a coarse grid refined by golden section and,
for every ``tau_d``, runs diagonally scaled projected gradient ascent over the
level polytope ``{sum(p) <= K P_A, (1 - alpha) P_A <= p_i <= P_P}``.
:func:`oracle_grid_search` is an independent exhaustive check for ``K <= 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._search import golden_section_max, project_capped_box
from .channel import ChannelRealization
from .errors import DomainError, OracleLimitError
from .physics import (
    FEASIBILITY_TOL,
    Schedule,
    SystemConfig,
    c6_fraction_bound,
    constraint_residuals,
    sum_rate,
    total_harvested,
)

OPTIMAL = "optimal-at-tolerance"
SUBOPTIMAL = "feasible-suboptimal"
INFEASIBLE = "infeasible"

ORACLE_MAX_K = 3


@dataclass(frozen=True)
class ProblemInstance:
    channel: ChannelRealization
    config: SystemConfig

    def __post_init__(self):
        if self.channel.K != self.config.K:
            raise DomainError(
                f"channel has {self.channel.K} users but config has {self.config.K}"
            )
        if not 0.0 < self.config.alpha <= 1.0:
            raise DomainError(
                f"alpha must lie in (0, 1] for the modulated problem, got {self.config.alpha}"
            )

    @property
    def variant(self) -> str:
        return "full-range" if self.config.alpha == 1.0 else "reduced-range"

    @property
    def K(self) -> int:
        return self.config.K


@dataclass(frozen=True)
class SolveOptions:
    restarts: int = 10
    tolerance: float = 1e-7
    outer_grid: int = 64
    seed: int = 0
    max_iter: int = 400


@dataclass
class SolveResult:
    objective: float
    schedule: Schedule | None
    iterations: int
    restarts_used: int
    max_residual: float
    status: str
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "objective_nats": self.objective,
            "status": self.status,
            "iterations": self.iterations,
            "restarts_used": self.restarts_used,
            "max_residual": self.max_residual,
            "schedule": None if self.schedule is None else self.schedule.to_dict(),
            **self.info,
        }


def tight_schedule(tau_d, p_dl, problem: ProblemInstance) -> Schedule:
    """Complete a ``(tau_d, p_dl)`` pair into a schedule with both coupling
    constraints active.

    Each user takes the largest uplink share the levels allow and spends all
    its harvested energy, net of circuit power, in that share. Users with no
    share, or whose energy cannot cover the circuit power, transmit nothing.
    """
    cfg, ch = problem.config, problem.channel
    p = np.asarray(p_dl, dtype=float)
    share = np.maximum(c6_fraction_bound(p, cfg.alpha, cfg.p_a), 0.0)
    tau_ul = share * (1.0 - tau_d)
    energy = np.array([total_harvested(h, p, tau_d, cfg.K, cfg.eta) for h in ch.h_dl])
    p_ul = np.zeros(cfg.K)
    on = tau_ul > 0
    p_ul[on] = np.maximum(energy[on] / tau_ul[on] - np.asarray(cfg.p_c)[on], 0.0)
    return Schedule(tau_d=tau_d, p_dl=p, tau_ul=tau_ul, p_ul=p_ul)


def reduced_objective(tau_d, p_dl, problem: ProblemInstance) -> float:
    """Sum rate at ``(tau_d, p_dl)`` with the energy and share constraints tight."""
    if not 0.0 < tau_d < 1.0:
        raise DomainError(f"tau_d must lie in (0, 1), got {tau_d}")
    p = np.asarray(p_dl, dtype=float)
    if p.shape != (problem.K,):
        raise DomainError(f"expected {problem.K} downlink levels, got shape {p.shape}")
    return sum_rate(tight_schedule(tau_d, p, problem), problem.channel, problem.config)


class _LevelProblem:
    """Batched objective, gradient and curvature in normalized levels ``x = p / P_A``.

    Rows of ``X`` are independent candidate level vectors; ``tau`` holds one
    downlink duration per row.
    """

    def __init__(self, problem: ProblemInstance):
        cfg, ch = problem.config, problem.channel
        self.K = cfg.K
        self.alpha = cfg.alpha
        self.lo = 1.0 - cfg.alpha
        self.hi = cfg.peak_ratio
        self.budget = float(cfg.K)
        # uplink SNR numerator per unit (tau_d * sum(x)) and circuit-power offset
        self.gain = cfg.eta * ch.h_dl * ch.h_ul * cfg.p_a / (cfg.K * cfg.n0)
        self.offset = ch.h_ul * np.asarray(cfg.p_c) / cfg.n0

    def evaluate(self, X, tau, grad=True):
        S = np.maximum(X.sum(axis=1), 1e-300)
        T = 1.0 - tau
        share = np.maximum(X - self.lo, 0.0) / (self.alpha * S[:, None])
        tu = share * T[:, None]
        A = self.gain[None, :] * (tau * S)[:, None]
        d = self.offset[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            snr = A / tu - d
            live = (tu > 0) & (snr > 0)
            R = np.where(live, tu * np.log1p(np.where(live, snr, 0.0)), 0.0)
        F = R.sum(axis=1)
        if not grad:
            return F
        # zero-share users get a tiny share so the (large) marginal value is finite
        tu_e = np.maximum(tu, 1e-15 * T[:, None])
        ratio = A / tu_e
        snr_e = ratio - d
        live_e = snr_e > 0
        snr_e = np.where(live_e, snr_e, 0.0)
        dR_dtu = np.where(live_e, np.log1p(snr_e) - ratio / (1.0 + snr_e), 0.0)
        dR_dA = np.where(live_e, 1.0 / (1.0 + snr_e), 0.0)
        curv = np.where(live_e, ratio**2 / ((1.0 + snr_e) ** 2 * tu_e), 0.0)
        scale = T / (self.alpha * S)
        coupling = self.alpha * (dR_dtu * share).sum(axis=1)
        G = scale[:, None] * (dR_dtu - coupling[:, None])
        G += ((dR_dA * self.gain[None, :]).sum(axis=1) * tau)[:, None]
        D = scale[:, None] ** 2 * curv
        D = np.maximum(D, 1e-9 * D.max(axis=1, keepdims=True))
        D = np.where(D > 0, D, 1.0)
        return F, G, D

    def project(self, Y, W=1.0):
        return project_capped_box(Y, W, self.lo, self.hi, self.budget)

    def ascend(self, X, tau, max_iter):
        """Scaled projected gradient ascent with Armijo backtracking, row-wise.

        Returns final rows, their objective values, the per-row convergence
        flag and the total iteration count.
        """
        X = self.project(X)
        B = X.shape[0]
        tau = np.broadcast_to(np.asarray(tau, dtype=float), (B,)).copy()
        F, G, D = self.evaluate(X, tau)
        step = np.ones(B)
        active = np.ones(B, dtype=bool)
        converged = np.zeros(B, dtype=bool)
        iters = 0
        for _ in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            iters += 1
            x0, f0, g0, w0 = X[idx], F[idx], G[idx], 1.0 / D[idx]
            t = step[idx]
            accepted = np.zeros(idx.size, dtype=bool)
            x_new = x0.copy()
            f_new = f0.copy()
            pending = np.arange(idx.size)
            for _ in range(60):
                xp = self.project(x0[pending] + t[pending, None] * g0[pending] * w0[pending], w0[pending])
                fp = self.evaluate(xp, tau[idx[pending]], grad=False)
                gain = ((xp - x0[pending]) * g0[pending]).sum(axis=1)
                ok = fp >= f0[pending] + 1e-4 * gain
                done = pending[ok]
                x_new[done], f_new[done] = xp[ok], fp[ok]
                accepted[done] = True
                pending = pending[~ok]
                if pending.size == 0:
                    break
                t[pending] *= 0.5
            moved = np.abs(x_new - x0).max(axis=1)
            improved = f_new - f0
            stop = (~accepted) | (moved <= 1e-13) | (improved <= 1e-14 * np.abs(f0))
            upd = idx[accepted]
            X[upd], F[upd] = x_new[accepted], f_new[accepted]
            if upd.size:
                _, G[upd], D[upd] = self.evaluate(X[upd], tau[upd])
            step[idx] = np.minimum(2.0 * t, 1.0)
            converged[idx[stop]] = True
            active[idx[stop]] = False
        return X, F, converged, iters


def _random_levels(rng, n, lp: _LevelProblem):
    f = rng.dirichlet(np.ones(lp.K), size=n)
    fill = rng.uniform(0.5, 1.0, size=(n, 1))
    X = lp.lo + (fill * lp.budget - lp.K * lp.lo) * f
    return np.minimum(X, lp.hi)


def _proportional_levels(lp: _LevelProblem):
    g = lp.gain
    f = g / g.sum() if g.sum() > 0 else np.full(lp.K, 1.0 / lp.K)
    return lp.project(lp.lo + lp.alpha * lp.budget * f[None, :])[0]


def _infeasible(reason, **info):
    return SolveResult(
        objective=0.0,
        schedule=None,
        iterations=0,
        restarts_used=0,
        max_residual=math.inf,
        status=INFEASIBLE,
        info={"reason": reason, **info},
    )


def solve(problem: ProblemInstance, options: SolveOptions | None = None) -> SolveResult:
    """Maximize the uplink sum rate for one channel realization.

    Outer search over ``tau_d``: a midpoint grid of ``options.outer_grid``
    points, then golden section on the bracket around the best grid point down
    to ``options.tolerance``. The duration that is optimal for the equal split
    is always evaluated as an extra candidate, and since the equal split is a
    start of every inner ascent the result never falls below the equal
    resource allocation. The inner ascent at the chosen ``tau_d`` is repeated
    from ``options.restarts`` random interior starts.
    """
    opt = options or SolveOptions()
    cfg = problem.config
    if cfg.p_p < cfg.p_a:
        return _infeasible("peak power below average power")
    lp = _LevelProblem(problem)
    tau_max = cfg.tau_d_max
    tau_hi = tau_max if tau_max < 1.0 else 1.0 - 1e-12
    tau_lo = 1e-12 * tau_max
    uniform = np.ones(lp.K)
    proportional = _proportional_levels(lp)
    total_iters = 0
    unconverged = False

    n = opt.outer_grid
    grid = tau_lo + (np.arange(n) + 0.5) / n * (tau_hi - tau_lo)
    starts = np.vstack([np.tile(uniform, (n, 1)), np.tile(proportional, (n, 1))])
    Xg, Fg, _, it = lp.ascend(starts, np.concatenate([grid, grid]), opt.max_iter)
    total_iters += it
    Fg2 = Fg.reshape(2, n)
    rowbest = np.argmax(Fg2, axis=0)
    k = int(np.argmax(Fg2.max(axis=0)))
    warm = {"x": Xg[rowbest[k] * n + k].copy()}

    def inner(tau, *extra):
        nonlocal total_iters
        X, F, _, it = lp.ascend(np.vstack([warm["x"], *extra]), tau, opt.max_iter)
        total_iters += it
        j = int(np.argmax(F))
        warm["x"] = X[j].copy()
        return F[j], X[j].copy()

    cache = {}

    def phi(tau, *extra):
        value, x = inner(tau, *extra)
        cache[tau] = (value, x)
        return value

    a = grid[k - 1] if k > 0 else tau_lo
    b = grid[k + 1] if k < n - 1 else tau_hi
    golden_section_max(phi, a, b, opt.tolerance)

    # duration that is optimal for the equal split: guarantees dominance
    def era_phi(tau):
        return float(lp.evaluate(uniform[None, :], np.array([tau]), grad=False)[0])

    era_grid = np.array([era_phi(t) for t in grid])
    ke = int(np.argmax(era_grid))
    ae = grid[ke - 1] if ke > 0 else tau_lo
    be = grid[ke + 1] if ke < n - 1 else tau_hi
    tau_era, _, _ = golden_section_max(era_phi, ae, be, opt.tolerance)
    phi(tau_era, uniform)
    cache[float(grid[k])] = (float(Fg2[rowbest[k], k]), Xg[rowbest[k] * n + k].copy())

    tau_star = min(cache, key=lambda t: (-cache[t][0], t))
    value_star, x_star = cache[tau_star]

    rng = np.random.default_rng(opt.seed)
    polish = np.vstack([x_star, uniform, _random_levels(rng, opt.restarts, lp)])
    Xp, Fp, conv, it = lp.ascend(polish, tau_star, opt.max_iter)
    total_iters += it
    candidates = [(value_star, tau_star, tuple(x_star))]
    candidates += [(float(Fp[i]), tau_star, tuple(Xp[i])) for i in range(Xp.shape[0])]
    best = min(candidates, key=lambda c: (-c[0], c[1], c[2]))
    best_index = candidates.index(best)
    if best_index > 0 and not conv[best_index - 1]:
        unconverged = True

    tau_d = float(best[1])
    p_dl = np.asarray(best[2]) * cfg.p_a
    schedule = tight_schedule(tau_d, p_dl, problem)
    report = constraint_residuals(schedule, problem.channel, cfg)
    objective = sum_rate(schedule, problem.channel, cfg)
    if not report.feasible:
        status = INFEASIBLE
    elif unconverged:
        status = SUBOPTIMAL
    else:
        status = OPTIMAL
    return SolveResult(
        objective=objective,
        schedule=schedule,
        iterations=total_iters,
        restarts_used=opt.restarts,
        max_residual=report.max_residual,
        status=status,
        info={"variant": problem.variant, "full_budget": bool(np.isclose(p_dl.sum(), cfg.K * cfg.p_a, rtol=1e-9))},
    )


def simplex_lattice(K, resolution):
    """All ``n / resolution`` with ``n`` non-negative integers summing to ``resolution``."""
    r = int(resolution)
    if K == 1:
        return np.ones((1, 1))
    if K == 2:
        n = np.arange(r + 1)
        return np.stack([n, r - n], axis=1) / r
    if K == 3:
        i, j = np.meshgrid(np.arange(r + 1), np.arange(r + 1), indexing="ij")
        keep = i + j <= r
        i, j = i[keep], j[keep]
        return np.stack([i, j, r - i - j], axis=1) / r
    raise OracleLimitError(f"oracle limited to K <= {ORACLE_MAX_K}, got K={K}")


def oracle_grid_search(problem: ProblemInstance, resolution: int = 400) -> SolveResult:
    """Exhaustive search over ``tau_d`` x uplink fractions at full average power.

    ``tau_d`` runs over ``k / resolution`` and the fractions over the simplex
    lattice with denominator ``resolution``; the levels are the ones that
    carry those fractions while spending exactly ``K * P_A``. Doubling the
    resolution gives a superset of points. Uses its own direct evaluation of
    the energy and rate model, not the solver's.

    When ``alpha`` exceeds the peak-power headroom some fraction vectors are
    unreachable at full power and the true optimum may spend less; the oracle
    is then only a lower bound.
    """
    K = problem.K
    if K > ORACLE_MAX_K:
        raise OracleLimitError(f"oracle limited to K <= {ORACLE_MAX_K}, got K={K}")
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    cfg, ch = problem.config, problem.channel
    if cfg.p_p < cfg.p_a:
        return _infeasible("peak power below average power")
    frac = simplex_lattice(K, resolution)
    levels = (1.0 - cfg.alpha) * cfg.p_a + cfg.alpha * K * cfg.p_a * frac
    keep = np.all(levels <= cfg.p_p * (1.0 + 1e-12), axis=1)
    frac, levels = frac[keep], levels[keep]
    taus = np.arange(1, resolution) / resolution * cfg.tau_d_max
    if cfg.tau_d_max < 1.0:
        taus = np.append(taus, cfg.tau_d_max)
    h_dl, h_ul, pc = ch.h_dl, ch.h_ul, np.asarray(cfg.p_c)

    best_val, best_t, best_m = -np.inf, None, None
    chunk = max(1, 2_000_000 // max(1, frac.size))
    for start in range(0, taus.size, chunk):
        t = taus[start:start + chunk][:, None, None]
        energy = cfg.eta * h_dl[None, None, :] * cfg.p_a * t  # full-power harvest
        slot = frac[None, :, :] * (1.0 - t)
        with np.errstate(divide="ignore", invalid="ignore"):
            power = energy / slot - pc[None, None, :]
            ok = (slot > 0) & (power > 0)
            r = np.where(ok, slot * np.log1p(np.where(ok, h_ul * power / cfg.n0, 0.0)), 0.0)
        total = r.sum(axis=2)
        ti, mi = np.unravel_index(int(np.argmax(total)), total.shape)
        if total[ti, mi] > best_val:
            best_val, best_t, best_m = float(total[ti, mi]), float(taus[start + ti]), int(mi)

    schedule = tight_schedule(best_t, levels[best_m], problem)
    report = constraint_residuals(schedule, ch, cfg)
    return SolveResult(
        objective=sum_rate(schedule, ch, cfg),
        schedule=schedule,
        iterations=int(taus.size * frac.shape[0]),
        restarts_used=0,
        max_residual=report.max_residual,
        status=OPTIMAL if report.feasible else INFEASIBLE,
        info={"variant": problem.variant, "resolution": int(resolution), "grid_value": best_val},
    )
