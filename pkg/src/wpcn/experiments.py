"""Monte Carlo sweeps comparing the modulated schedule with equal allocation.

Trial ``t`` of every grid point uses the channel drawn from
``(base_seed, t)``, so all grid points see the same fading (common random
numbers) and any two runs of the same SweepSpec agree bit for bit, whatever the
number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baseline import era_optimize
from .channel import Topology, sample_channel
from .errors import DomainError, WPCNError
from .optimizer import INFEASIBLE, ProblemInstance, SolveOptions, solve
from .physics import SystemConfig, dbm_to_watt, watt_to_dbm

CSV_COLUMNS = (
    "preset",
    "K",
    "ppr",
    "alpha",
    "mean_proposed_nats",
    "se_proposed",
    "mean_era_nats",
    "se_era",
    "trials",
    "base_seed",
)

FIG4_PPR = (1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


class SweepError(WPCNError):
    def __init__(self, grid_point, trial, seed, reason):
        self.grid_point = grid_point
        self.trial = trial
        self.seed = seed
        super().__init__(
            f"solver failed at grid point {grid_point}, trial {trial}, base seed {seed}: {reason}"
        )


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: a base configuration plus the axes to sweep.

    Users beyond the base topology are placed at ``fill_distance``. The peak
    power of each grid point is ``ppr * P_A``.
    """

    preset: str
    base_config: SystemConfig
    ppr: tuple[float, ...]
    alpha: tuple[float, ...]
    K: tuple[int, ...]
    trials: int = 200
    base_seed: int = 0
    fill_distance: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.base_seed < 0:
            raise DomainError("base_seed must be >= 0")
        if any(not 0.0 < a <= 1.0 for a in self.alpha):
            raise DomainError(f"alpha values must lie in (0, 1], got {self.alpha}")
        if any(not r >= 1.0 for r in self.ppr):
            raise DomainError(f"ppr values must be >= 1, got {self.ppr}")
        if any(k < 1 for k in self.K):
            raise DomainError(f"K values must be >= 1, got {self.K}")
        for k in self.K:
            self.distances_for(k)

    def distances_for(self, K) -> tuple[float, ...]:
        base = self.base_config.topology.distances
        if K <= len(base):
            return base[:K]
        if self.fill_distance is None:
            raise DomainError(f"K={K} exceeds the {len(base)} configured distances")
        return base + (float(self.fill_distance),) * (K - len(base))

    def config_for(self, K, ppr, alpha) -> SystemConfig:
        base = self.base_config
        topo = Topology(self.distances_for(K), base.topology.path_loss_exponent)
        pc = base.p_c[0] if len(set(base.p_c)) <= 1 else None
        if pc is None and K != base.K:
            raise DomainError("per-user circuit powers cannot be extended to a new K")
        return base.with_(
            topology=topo,
            p_p=ppr * base.p_a,
            alpha=alpha,
            p_c=pc if pc is not None else base.p_c,
        )

    def grid(self) -> list[tuple[int, float, float]]:
        return [(k, r, a) for k in self.K for r in self.ppr for a in self.alpha]

    def with_(self, **changes) -> "SweepSpec":
        return replace(self, **changes)


def _preset_config(distances) -> SystemConfig:
    p_a = dbm_to_watt(20.0)
    return SystemConfig(
        topology=Topology(tuple(distances), 2.0),
        p_a=p_a,
        p_p=4.0 * p_a,
        alpha=0.3,
        eta=0.5,
        n0=dbm_to_watt(-160.0),
        p_c=0.0,
    )


def preset(name: str, trials: int = 200, base_seed: int = 0) -> SweepSpec:
    """Named experiment setups.

    ``fig4`` sweeps the peak-to-average ratio for three dynamic range indices
    with five users; ``fig5`` and ``fig6`` sweep the user count at ratio 4 and
    ``alpha = 0.3``, adding users at 15 m and 10 m respectively.
    """
    if name == "fig4":
        return SweepSpec(
            preset="fig4",
            base_config=_preset_config((5.0, 10.0, 15.0, 10.0, 10.0)),
            ppr=FIG4_PPR,
            alpha=(0.3, 0.5, 1.0),
            K=(5,),
            trials=trials,
            base_seed=base_seed,
            fill_distance=10.0,
        )
    if name in ("fig5", "fig6"):
        return SweepSpec(
            preset=name,
            base_config=_preset_config((5.0, 10.0, 15.0)),
            ppr=(4.0,),
            alpha=(0.3,),
            K=(3, 5, 10),
            trials=trials,
            base_seed=base_seed,
            fill_distance=15.0 if name == "fig5" else 10.0,
        )
    raise DomainError(f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}")


PRESET_NAMES = ("fig4", "fig5", "fig6")


@dataclass
class SweepRow:
    preset: str
    K: int
    ppr: float
    alpha: float
    mean_proposed: float
    se_proposed: float
    mean_era: float
    se_era: float
    trials: int
    base_seed: int
    proposed: np.ndarray = field(repr=False)
    era: np.ndarray = field(repr=False)

    def csv_fields(self) -> list[str]:
        return [
            self.preset,
            str(self.K),
            repr(self.ppr),
            repr(self.alpha),
            repr(self.mean_proposed),
            repr(self.se_proposed),
            repr(self.mean_era),
            repr(self.se_era),
            str(self.trials),
            str(self.base_seed),
        ]


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict

    def row(self, K, ppr, alpha) -> SweepRow:
        for r in self.rows:
            if r.K == K and r.ppr == ppr and r.alpha == alpha:
                return r
        raise KeyError((K, ppr, alpha))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def to_json(self) -> str:
        def num(x):
            return None if not math.isfinite(x) else x

        doc = {
            "metadata": self.metadata,
            "columns": list(CSV_COLUMNS),
            "rows": [
                {
                    "preset": r.preset,
                    "K": r.K,
                    "ppr": r.ppr,
                    "alpha": r.alpha,
                    "mean_proposed_nats": num(r.mean_proposed),
                    "se_proposed": num(r.se_proposed),
                    "mean_era_nats": num(r.mean_era),
                    "se_era": num(r.se_era),
                    "trials": r.trials,
                    "base_seed": r.base_seed,
                }
                for r in self.rows
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, path):
        text = self.to_json() if str(path).endswith(".json") else self.to_csv()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def mean_and_se(values) -> tuple[float, float]:
    """Mean and standard error with exactly rounded sums (order independent)."""
    v = [float(x) for x in values]
    n = len(v)
    mean = math.fsum(v) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2 for x in v) / (n - 1)
    return mean, math.sqrt(var / n)


def _run_trial(args):
    spec, trial, options = args
    grid = spec.grid()
    proposed = []
    era_by_K = {}
    for K, ppr, alpha in grid:
        config = spec.config_for(K, ppr, alpha)
        channel = sample_channel(config.topology, spec.base_seed, trial)
        if K not in era_by_K:
            era = era_optimize(channel, config)
            if era.status == INFEASIBLE:
                raise SweepError((K, ppr, alpha), trial, spec.base_seed, "equal allocation infeasible")
            era_by_K[K] = era.objective
        try:
            result = solve(ProblemInstance(channel, config), options)
        except WPCNError as exc:
            raise SweepError((K, ppr, alpha), trial, spec.base_seed, str(exc)) from exc
        if result.status == INFEASIBLE:
            reason = result.info.get("reason", "infeasible result")
            raise SweepError((K, ppr, alpha), trial, spec.base_seed, reason)
        proposed.append(result.objective)
    return proposed, [era_by_K[K] for K, _, _ in grid]


def default_workers() -> int:
    return max(1, int(os.environ.get("WPCN_WORKERS", "1")))


def run_sweep(spec: SweepSpec, workers: int | None = None, options: SolveOptions | None = None) -> SweepResult:
    """Average proposed and equal-allocation sum rates over ``spec.trials`` channels.

    ``workers > 1`` spreads trials over a process pool; results are gathered in
    trial order and reduced with exactly rounded sums, so the output does not
    depend on the worker count.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    options = options or SolveOptions()
    jobs = [(spec, t, options) for t in range(spec.trials)]
    if workers == 1:
        per_trial = [_run_trial(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))

    proposed = np.array([p for p, _ in per_trial])  # (trials, grid)
    era = np.array([e for _, e in per_trial])
    rows = []
    for j, (K, ppr, alpha) in enumerate(spec.grid()):
        mp, sp = mean_and_se(proposed[:, j])
        me, se = mean_and_se(era[:, j])
        rows.append(
            SweepRow(
                preset=spec.preset,
                K=K,
                ppr=float(ppr),
                alpha=float(alpha),
                mean_proposed=mp,
                se_proposed=sp,
                mean_era=me,
                se_era=se,
                trials=spec.trials,
                base_seed=spec.base_seed,
                proposed=proposed[:, j].copy(),
                era=era[:, j].copy(),
            )
        )
    return SweepResult(rows=rows, metadata=sweep_metadata(spec))


def sweep_metadata(spec: SweepSpec) -> dict:
    cfg = spec.base_config
    return {
        "preset": spec.preset,
        "trials": spec.trials,
        "base_seed": spec.base_seed,
        "p_a_dbm": watt_to_dbm(cfg.p_a),
        "p_a_watt": cfg.p_a,
        "eta": cfg.eta,
        "n0_watt": cfg.n0,
        "p_c_watt": list(cfg.p_c),
        "path_loss_exponent": cfg.topology.path_loss_exponent,
        "axes": {"K": list(spec.K), "ppr": list(spec.ppr), "alpha": list(spec.alpha)},
        "distances_m": {str(k): list(spec.distances_for(k)) for k in spec.K},
    }
