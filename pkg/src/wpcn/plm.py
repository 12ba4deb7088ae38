"""Power level modulation: uplink schedule carried by downlink energy levels.

The H-AP splits the downlink into ``K`` equal subslots and transmits level
``p_i`` in subslot ``i``. A user that can only measure harvested energy sees
``E_ij = eta * h_i * p_j * tau_d / K``; the common factor ``eta * h_i * tau_d / K``
cancels in the ratios, so every user recovers the same uplink fractions no
matter how strong its own channel is.

With dynamic range index ``alpha`` each level sits on a floor of
``(1 - alpha) * P_A`` and only the excess over that floor carries scheduling
information.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NoEnergyError, UnrepresentableScheduleError
from .physics import SystemConfig, harvested_energy_subslot

FRACTION_SUM_TOL = 1e-12
NO_LIMIT = math.inf


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")


def as_fractions(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise DomainError("schedule fractions must be a non-empty 1-D vector")
    if np.any(f < 0):
        raise DomainError("schedule fractions must be non-negative")
    if abs(math.fsum(f) - 1.0) > FRACTION_SUM_TOL:
        raise DomainError(f"schedule fractions must sum to 1, got {math.fsum(f)!r}")
    return f


def encode_schedule(f, config: SystemConfig) -> np.ndarray:
    """Downlink levels that make every user decode fractions ``f``.

    ``p_i = (1 - alpha) P_A + alpha K P_A f_i``. The levels always sum to
    ``K * P_A``. Raises :class:`UnrepresentableScheduleError` if some level
    would exceed the peak power.
    """
    f = as_fractions(f)
    if f.size != config.K:
        raise DomainError(f"expected {config.K} fractions, got {f.size}")
    alpha = config.alpha
    _check_alpha(alpha)
    p = (1.0 - alpha) * config.p_a + alpha * config.K * config.p_a * f
    # round-off at the exact peak-power boundary must not count as a violation
    limit = config.p_p * (1.0 + 1e-12)
    bad = np.flatnonzero(p > limit)
    if bad.size:
        i = int(bad[np.argmax(p[bad])])
        raise UnrepresentableScheduleError(i, float(p[i]), config.p_p)
    return np.minimum(p, config.p_p)


def measure(p_dl, h_dl_i, tau_d, eta) -> np.ndarray:
    """Per-subslot energies one user harvests from the levels ``p_dl``."""
    p = np.asarray(p_dl, dtype=float)
    return harvested_energy_subslot(h_dl_i, p, tau_d, p.size, eta)


def decode_schedule(e, alpha) -> np.ndarray:
    """Recover uplink fractions from the energies harvested in each subslot.

    ``f_i = (e_i - E_C) / (alpha * sum(e))`` with floor energy
    ``E_C = (1 - alpha) / K * sum(e)``. Components that come out negative
    (only possible with a mismatched ``alpha`` or noisy measurements) are
    clamped to zero and the rest renormalized, so the result is always a valid
    fraction vector.
    """
    _check_alpha(alpha)
    e = np.asarray(e, dtype=float)
    if e.ndim != 1 or e.size == 0:
        raise DomainError("energies must be a non-empty 1-D vector")
    if np.any(e < 0) or not np.all(np.isfinite(e)):
        raise DomainError("energies must be finite and non-negative")
    peak = e.max()
    if peak <= 0:
        raise NoEnergyError("no energy received: cannot decode a schedule")
    e = e / peak  # the decode is scale free; this keeps tiny energies out of underflow
    total = math.fsum(e)
    floor = (1.0 - alpha) / e.size * total
    f = (e - floor) / (alpha * total)
    f = np.maximum(f, 0.0)
    f /= math.fsum(f)
    # pin the sum to one by absorbing the rounding residue in the largest share
    k = int(np.argmax(f))
    f[k] += 1.0 - math.fsum(f)
    return f


def max_alpha(K, p_p, p_a) -> float:
    """Largest dynamic range index for which the peak power never binds."""
    if not p_a > 0 or p_p < p_a:
        raise DomainError("need p_p >= p_a > 0")
    if K < 2:
        return 1.0
    raw = (p_p / p_a - 1.0) / (K - 1)
    return min(max(raw, 0.0), 1.0)


def max_users(alpha, p_p, p_a) -> float:
    """Largest user count for which the peak power never binds.

    Returns :data:`NO_LIMIT` (``inf``) when ``alpha == 0``.
    """
    if not p_a > 0 or p_p < p_a:
        raise DomainError("need p_p >= p_a > 0")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0:
        return NO_LIMIT
    # tolerance keeps exact boundaries such as (alpha=0.1, ratio 1.3) from
    # rounding down a whole user
    return math.floor((p_p / p_a - 1.0) / alpha + 1.0 + 1e-9)
