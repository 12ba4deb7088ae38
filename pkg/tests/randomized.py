"""Random instances shared by the property and acceptance tests."""

import numpy as np

from wpcn.channel import ChannelRealization, Topology
from wpcn.optimizer import ProblemInstance
from wpcn.physics import Schedule, SystemConfig, c6_fraction_bound, dbm_to_watt


def random_config(rng, K, alpha, ppr=None, p_a=None, circuit=True):
    d = rng.choice([5.0, 10.0, 15.0], size=K)
    p_a = dbm_to_watt(rng.uniform(0.0, 30.0)) if p_a is None else p_a
    ppr = rng.uniform(1.0, 6.0) if ppr is None else ppr
    pc = rng.choice([0.0, 1e-6]) * rng.uniform(0, 1, size=K) if circuit else np.zeros(K)
    return SystemConfig(
        topology=Topology(tuple(d)),
        p_a=p_a,
        p_p=ppr * p_a,
        alpha=alpha,
        eta=rng.uniform(0.2, 1.0),
        n0=dbm_to_watt(-160.0),
        p_c=tuple(pc),
    )


def random_channel(rng, config):
    h = rng.exponential(size=config.K) * config.topology.mean_gains()
    return ChannelRealization.reciprocal(h)


def random_problem(rng, K=None, alpha=None, circuit=True):
    K = int(rng.integers(1, 7)) if K is None else K
    alpha = float(rng.uniform(0.05, 1.0)) if alpha is None else alpha
    cfg = random_config(rng, K, alpha, circuit=circuit)
    return ProblemInstance(random_channel(rng, cfg), cfg)


def random_levels(rng, config):
    """Levels on the full-budget slice, possibly above the peak."""
    f = rng.dirichlet(np.full(config.K, rng.uniform(0.3, 3.0)))
    return (1.0 - config.alpha) * config.p_a + config.alpha * config.K * config.p_a * f


def random_point(rng):
    """A strictly positive schedule near the feasible boundary.

    Each coupled quantity is drawn as its tight value times a slack factor
    that is either all below one (mostly feasible) or straddles one.
    """
    prob = random_problem(rng)
    cfg, ch = prob.config, prob.channel
    K = cfg.K
    lo, hi = (0.7, 1.0) if rng.random() < 0.4 else (0.85, 1.15)

    def slack(n=None):
        return rng.uniform(lo, hi, size=n)

    tau_d = float(rng.uniform(0.02, 0.98))
    p_dl = random_levels(rng, cfg) * slack(K)
    share = np.abs(c6_fraction_bound(p_dl, cfg.alpha, cfg.p_a)) + 1e-6
    tau_ul = share * (1.0 - tau_d) * slack(K)
    energy = cfg.eta * ch.h_dl * tau_d * p_dl.sum() / K
    p_ul = np.maximum(energy / tau_ul - np.asarray(cfg.p_c), 1e-30) * slack(K)
    return prob, Schedule(tau_d=tau_d, p_dl=p_dl, tau_ul=tau_ul, p_ul=p_ul)


def random_codec_case(rng):
    K = int(rng.integers(1, 11))
    alpha = float(rng.uniform(0.01, 1.0))
    cfg = random_config(rng, K, alpha, ppr=float(K))
    f = rng.dirichlet(np.full(K, rng.uniform(0.2, 3.0)))
    if K > 1 and rng.random() < 0.2:
        f[rng.integers(K)] = 0.0
        f /= f.sum()
    f[np.argmax(f)] += 1.0 - f.sum()
    return cfg, random_channel(rng, cfg), f, float(rng.uniform(0.01, 0.99))
