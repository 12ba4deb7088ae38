import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wpcn.channel import Topology
from wpcn.errors import DomainError, NoEnergyError, UnrepresentableScheduleError
from wpcn.physics import SystemConfig
from wpcn.plm import NO_LIMIT, decode_schedule, encode_schedule, max_alpha, max_users, measure


def cfg(K, alpha, p_a=1.0, ppr=None):
    ppr = K if ppr is None else ppr  # ppr = K lets every fraction vector through at alpha = 1
    return SystemConfig(topology=Topology((10.0,) * K), p_a=p_a, p_p=ppr * p_a, alpha=alpha)


def test_encode_example():
    p = encode_schedule([0.75, 0.25], cfg(2, 0.5, p_a=2.0))
    np.testing.assert_allclose(p, [2.5, 1.5], rtol=1e-15)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.77, 1.0])
def test_encode_uniform_is_constant_power(alpha):
    p = encode_schedule(np.full(4, 0.25), cfg(4, alpha, p_a=0.1))
    np.testing.assert_allclose(p, 0.1, rtol=1e-15)


def test_encode_at_peak_boundary():
    c = cfg(5, 0.0, p_a=0.1, ppr=4.0)
    a = max_alpha(5, c.p_p, c.p_a)
    p = encode_schedule([1, 0, 0, 0, 0], c.with_(alpha=a))
    assert p[0] == pytest.approx(c.p_p, rel=1e-12)


def test_encode_refuses_unrepresentable():
    with pytest.raises(UnrepresentableScheduleError) as err:
        encode_schedule([0.1, 0.9], cfg(2, 1.0, ppr=1.5))
    assert err.value.user == 1
    assert "user 1" in str(err.value)


@pytest.mark.parametrize("f", [[0.5, 0.6], [-0.1, 1.1], [1.0]])
def test_encode_rejects_bad_fractions(f):
    with pytest.raises(DomainError):
        encode_schedule(f, cfg(2, 0.5))


def test_decode_examples():
    np.testing.assert_allclose(decode_schedule([2.5, 1.5], 0.5), [0.75, 0.25], rtol=1e-15)
    np.testing.assert_allclose(decode_schedule([3.0] * 6, 0.4), np.full(6, 1 / 6), rtol=1e-15)
    for c in (1e-20, 3.7, 1e9):
        np.testing.assert_allclose(decode_schedule([2.5 * c, 1.5 * c], 0.5), [0.75, 0.25], rtol=1e-14)


def test_decode_errors():
    with pytest.raises(NoEnergyError):
        decode_schedule([0.0, 0.0], 0.5)
    with pytest.raises(DomainError):
        decode_schedule([1.0, -1.0], 0.5)
    with pytest.raises(DomainError):
        decode_schedule([1.0, 1.0], 0.0)


def _fractions(draw_size):
    return arrays(np.float64, draw_size, elements=st.floats(0.0, 1.0)).filter(lambda a: a.sum() > 1e-3)


@settings(max_examples=300, deadline=None)
@given(
    st.integers(1, 10).flatmap(_fractions),
    st.floats(0.01, 1.0),
    st.floats(1e-5, 1.0),
    st.floats(1e-3, 0.999),
)
def test_round_trip_and_consensus(raw, alpha, h_scale, tau):
    K = raw.size
    f = raw / raw.sum()
    f[np.argmax(f)] += 1.0 - f.sum()
    c = cfg(K, alpha, p_a=0.1, ppr=K)
    p = encode_schedule(f, c)
    assert p.sum() == pytest.approx(K * 0.1, rel=1e-12)
    gains = h_scale * np.geomspace(1.0, 1e-3, K)
    decoded = [decode_schedule(measure(p, h, tau, 0.5), alpha) for h in gains]
    for d in decoded:
        np.testing.assert_allclose(d, f, rtol=0, atol=1e-12)
        np.testing.assert_allclose(d, decoded[0], rtol=0, atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 12), elements=st.floats(0.0, 1e6)).filter(lambda e: e.sum() > 0),
    st.floats(1e-6, 1.0),
)
def test_decode_always_returns_valid_fractions(e, alpha):
    f = decode_schedule(e, alpha)
    assert np.all(f >= 0)
    assert abs(f.sum() - 1.0) <= 1e-12


def test_decode_dual_of_encode_under_scaling():
    c = cfg(3, 0.6, p_a=0.1, ppr=3.0)
    f = np.array([0.5, 0.3, 0.2])
    p = encode_schedule(f, c)
    np.testing.assert_allclose(decode_schedule(p, 0.6), f, atol=1e-14)
    np.testing.assert_allclose(decode_schedule(17.0 * p, 0.6), f, atol=1e-14)


@pytest.mark.parametrize(
    "K, ppr, expected",
    [(5, 4.0, 0.75), (2, 1.0, 0.0), (4, 4.0, 1.0), (3, 10.0, 1.0), (1, 1.0, 1.0)],
)
def test_max_alpha(K, ppr, expected):
    assert max_alpha(K, ppr * 0.1, 0.1) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("alpha, ppr, expected", [(0.3, 4.0, 11), (1.0, 4.0, 4), (1.0, 1.0, 1), (0.1, 1.3, 4)])
def test_max_users(alpha, ppr, expected):
    assert max_users(alpha, ppr * 0.1, 0.1) == expected


def test_max_users_unbounded_without_modulation():
    assert max_users(0.0, 0.4, 0.1) == NO_LIMIT


def test_bounds_reject_peak_below_average():
    with pytest.raises(DomainError):
        max_users(0.5, 0.05, 0.1)
    with pytest.raises(DomainError):
        max_alpha(3, 0.05, 0.1)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 12), st.floats(1.0, 10.0), st.data())
def test_peak_never_binds_below_max_alpha(K, ppr, data):
    a = max_alpha(K, ppr, 1.0)
    if a == 0:
        return
    alpha = data.draw(st.floats(min(1e-3, a), a))
    c = cfg(K, alpha, p_a=1.0, ppr=ppr)
    for i in range(K):
        f = np.zeros(K)
        f[i] = 1.0
        assert encode_schedule(f, c).max() <= c.p_p * (1 + 1e-12)
    assert K <= max_users(alpha, ppr, 1.0)
