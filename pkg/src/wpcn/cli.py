"""Command-line entry point: ``wpcn {solve,decode,oracle,sweep,presets}``.

Config files are flat JSON objects; powers are given in dBm::

    {"distances": [5, 10, 15], "gamma": 2, "p_a_dbm": 20, "ppr": 4,
     "alpha": 0.3, "eta": 0.5, "n0_dbm": -160}

``p_p_dbm`` may replace ``ppr``; ``pc_dbm`` (scalar or per-user list) and
``e_d`` (joules) are optional.

Exit codes: 0 success, 1 domain or configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import plm
from .baseline import era_optimize
from .channel import Topology, sample_channel
from .errors import ConfigError, DomainError, SolverError, WPCNError
from .experiments import PRESET_NAMES, SweepError, default_workers, preset, run_sweep, sweep_metadata
from .optimizer import INFEASIBLE, ORACLE_MAX_K, ProblemInstance, SolveOptions, oracle_grid_search, solve
from .physics import SystemConfig, dbm_to_watt, watt_to_dbm

CONFIG_FIELDS = {"distances", "gamma", "p_a_dbm", "p_p_dbm", "ppr", "alpha", "eta", "n0_dbm", "pc_dbm", "e_d"}


def _field(doc, name, kind=float, default=None, required=False):
    if name not in doc or doc[name] is None:
        if required:
            raise ConfigError(f"config field {name!r} is required")
        return default
    try:
        return kind(doc[name])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field {name!r}: cannot read {doc[name]!r} ({exc})") from None


def config_from_dict(doc: dict) -> SystemConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    distances = _field(doc, "distances", lambda v: tuple(float(x) for x in v), required=True)
    gamma = _field(doc, "gamma", default=2.0)
    try:
        topology = Topology(distances, gamma)
    except DomainError as exc:
        raise ConfigError(f"config field 'distances'/'gamma': {exc}") from None
    p_a = dbm_to_watt(_field(doc, "p_a_dbm", required=True))
    if ("ppr" in doc) == ("p_p_dbm" in doc):
        raise ConfigError("config needs exactly one of 'ppr' and 'p_p_dbm'")
    if "ppr" in doc:
        ppr = _field(doc, "ppr")
        if not ppr > 0:
            raise ConfigError(f"config field 'ppr' must be > 0, got {ppr}")
        p_p = ppr * p_a
    else:
        p_p = dbm_to_watt(_field(doc, "p_p_dbm"))
    pc = doc.get("pc_dbm")
    if pc is None:
        p_c = None
    elif isinstance(pc, list):
        if len(pc) != topology.K:
            raise ConfigError(f"config field 'pc_dbm' needs {topology.K} entries, got {len(pc)}")
        p_c = tuple(dbm_to_watt(float(x)) for x in pc)
    else:
        p_c = dbm_to_watt(_field(doc, "pc_dbm"))
    return SystemConfig(
        topology=topology,
        p_a=p_a,
        p_p=p_p,
        alpha=_field(doc, "alpha", default=1.0),
        eta=_field(doc, "eta", default=0.5),
        n0=dbm_to_watt(_field(doc, "n0_dbm", default=-160.0)),
        p_c=p_c,
        e_d=_field(doc, "e_d"),
    )


def load_config(path) -> SystemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return config_from_dict(doc)


def describe_config(cfg: SystemConfig) -> dict:
    """Both dBm and linear watts for every power quantity."""
    return {
        "K": cfg.K,
        "distances_m": list(cfg.topology.distances),
        "gamma": cfg.topology.path_loss_exponent,
        "p_a_dbm": watt_to_dbm(cfg.p_a),
        "p_a_watt": cfg.p_a,
        "p_p_dbm": watt_to_dbm(cfg.p_p),
        "p_p_watt": cfg.p_p,
        "ppr": cfg.peak_ratio,
        "alpha": cfg.alpha,
        "eta": cfg.eta,
        "n0_dbm": watt_to_dbm(cfg.n0),
        "n0_watt": cfg.n0,
        "pc_dbm": [watt_to_dbm(c) if c > 0 else None for c in cfg.p_c],
        "pc_watt": list(cfg.p_c),
        "e_d": cfg.e_d,
    }


def _emit(doc, out):
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_solve(args):
    cfg = load_config(args.config)
    channel = sample_channel(cfg.topology, args.seed, args.trial)
    result = solve(ProblemInstance(channel, cfg), SolveOptions(restarts=args.restarts))
    era = era_optimize(channel, cfg)
    _emit(
        {
            "config": describe_config(cfg),
            "seed": args.seed,
            "trial": args.trial,
            "channel": {"h_dl": channel.h_dl.tolist(), "h_ul": channel.h_ul.tolist()},
            "proposed": result.to_dict(),
            "era": era.to_dict(),
        },
        args.out,
    )
    if result.status == INFEASIBLE:
        raise SolverError(result.info.get("reason", "solver returned an infeasible point"))


def cmd_decode(args):
    try:
        energies = [float(x) for x in args.energies.split(",")]
    except ValueError:
        raise DomainError(f"--energies must be comma-separated numbers, got {args.energies!r}") from None
    f = plm.decode_schedule(energies, args.alpha)
    print(",".join(f"{x:.12g}" for x in f))


def cmd_oracle(args):
    cfg = load_config(args.config)
    if cfg.K > ORACLE_MAX_K:
        raise DomainError(f"oracle limited to K ≤ {ORACLE_MAX_K} (config has K={cfg.K})")
    channel = sample_channel(cfg.topology, args.seed, args.trial)
    result = oracle_grid_search(ProblemInstance(channel, cfg), args.resolution)
    _emit(
        {
            "config": describe_config(cfg),
            "seed": args.seed,
            "trial": args.trial,
            "channel": {"h_dl": channel.h_dl.tolist(), "h_ul": channel.h_ul.tolist()},
            "oracle": result.to_dict(),
        },
        args.out,
    )
    if result.status == INFEASIBLE:
        raise SolverError(result.info.get("reason", "oracle found no feasible point"))


def cmd_sweep(args):
    spec = preset(args.preset, trials=args.trials, base_seed=args.base_seed)
    result = run_sweep(spec, workers=args.workers)
    result.write(args.out)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
    print(f"wrote {len(result.rows)} rows to {args.out}", file=sys.stderr)


def cmd_presets(args):
    doc = {}
    for name in PRESET_NAMES:
        spec = preset(name)
        meta = sweep_metadata(spec)
        meta["base_config"] = describe_config(spec.base_config)
        meta["fill_distance_m"] = spec.fill_distance
        doc[name] = meta
    print(json.dumps(doc, indent=2))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wpcn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimize one channel realization (proposed + ERA)")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decode", help="decode uplink fractions from subslot energies")
    p.add_argument("--energies", required=True, help="comma-separated energies e1,...,eK")
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("oracle", help="exhaustive grid search (K <= 3)")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="run a Monte Carlo preset and write CSV")
    p.add_argument("--preset", required=True, choices=PRESET_NAMES)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="default: $WPCN_WORKERS or 1")
    p.add_argument("--out", required=True, help="CSV path (a .json suffix writes JSON instead)")
    p.add_argument("--json", help="also write the JSON document here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list presets with their full parameterization")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is None and args.command == "sweep":
        args.workers = default_workers()
    try:
        args.func(args)
    except (SolverError, SweepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except WPCNError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
