import numpy as np
import pytest

from conftest import reference_config
from randomized import random_point
from wpcn.channel import ChannelRealization
from wpcn.errors import DomainError
from wpcn.optimizer import ProblemInstance, solve
from wpcn.physics import Schedule, constraint_residuals
from wpcn.transform import from_transformed, to_transformed, transformed_constraint_residuals

SHARED = ("C2_time", "C3_average_power", "C4_peak_power", "C5_energy", "C6_uplink_share")


def test_all_ones_maps_to_zero():
    s = Schedule(tau_d=1.0, p_dl=[1.0, 1.0], tau_ul=[1.0, 1.0], p_ul=[1.0, 1.0])
    t = to_transformed(s)
    assert t.t_d == 0.0
    for a in (t.t_ul, t.p_dl_log, t.p_ul_log):
        assert np.all(a == 0.0)


def test_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        K = int(rng.integers(1, 8))
        s = Schedule(
            tau_d=rng.uniform(1e-3, 1),
            p_dl=rng.lognormal(0, 3, K),
            tau_ul=rng.uniform(1e-6, 1, K),
            p_ul=rng.lognormal(-10, 4, K),
        )
        back = from_transformed(to_transformed(s))
        assert back.tau_d == pytest.approx(s.tau_d, rel=1e-12)
        for name in ("p_dl", "tau_ul", "p_ul"):
            np.testing.assert_allclose(getattr(back, name), getattr(s, name), rtol=1e-12)


def test_zero_entry_rejected():
    with pytest.raises(DomainError):
        to_transformed(Schedule(tau_d=0.5, p_dl=[1.0, 0.0], tau_ul=[0.1, 0.1], p_ul=[1.0, 1.0]))


@pytest.mark.parametrize("alpha", [1.0, 0.3])
def test_feasible_solution_stays_feasible(alpha):
    cfg = reference_config((5.0, 10.0, 15.0), alpha=alpha)
    prob = ProblemInstance(ChannelRealization.reciprocal([0.03, 0.01, 0.005]), cfg)
    s = solve(prob).schedule
    rep = transformed_constraint_residuals(to_transformed(s), prob)
    assert rep.max_residual <= 1e-9


def test_time_violation_shows_up():
    cfg = reference_config((10.0, 10.0))
    prob = ProblemInstance(ChannelRealization.reciprocal([0.01, 0.01]), cfg)
    s = Schedule(tau_d=0.5, p_dl=[0.1, 0.1], tau_ul=[0.3, 0.3], p_ul=[1e-6, 1e-6])
    rep = transformed_constraint_residuals(to_transformed(s), prob)
    assert rep.raw["C2_time"][0] > 0
    assert not rep.feasible


def sign_disagreements(prob, schedule, band=1e-9):
    orig = constraint_residuals(schedule, prob.channel, prob.config).scaled
    trans = transformed_constraint_residuals(to_transformed(schedule), prob).raw
    bad = 0
    for key in SHARED:
        o, t = orig[key], trans[key]
        outside = np.abs(o) > band
        bad += int(np.sum(outside & ((o > 0) != (t > 0))))
    return bad


def test_residual_signs_agree_on_random_points():
    rng = np.random.default_rng(42)
    feasible = 0
    for _ in range(1000):
        prob, s = random_point(rng)
        assert sign_disagreements(prob, s) == 0
        feasible += constraint_residuals(s, prob.channel, prob.config).feasible
    assert 50 < feasible < 950
