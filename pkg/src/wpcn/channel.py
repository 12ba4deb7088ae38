"""Quasi-static Rayleigh fading with distance-dependent path loss.

Every realization is a pure function of ``(topology, base_seed, trial_index)``:
the random stream is keyed by the ``(base_seed, trial_index)`` pair through
:class:`numpy.random.SeedSequence`, so trials can be generated in any order or
on any number of workers and still come out bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Topology:
    """User distances from the H-AP (meters) and the path-loss exponent."""

    distances: tuple[float, ...]
    path_loss_exponent: float = 2.0

    def __post_init__(self):
        d = tuple(float(x) for x in self.distances)
        object.__setattr__(self, "distances", d)
        if not d:
            raise DomainError("topology needs at least one user")
        if any(not np.isfinite(x) or x <= 0 for x in d):
            raise DomainError(f"distances must be positive, got {d}")
        if not self.path_loss_exponent > 0:
            raise DomainError(
                f"path_loss_exponent must be positive, got {self.path_loss_exponent}"
            )

    @property
    def K(self) -> int:
        return len(self.distances)

    def mean_gains(self) -> np.ndarray:
        return np.array(
            [path_loss_gain(d, self.path_loss_exponent) for d in self.distances]
        )


@dataclass(frozen=True)
class ChannelRealization:
    h_dl: np.ndarray
    h_ul: np.ndarray
    seed_tag: tuple[int, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        h_dl = np.array(self.h_dl, dtype=float)
        h_ul = np.array(self.h_ul, dtype=float)
        if h_dl.ndim != 1 or h_dl.shape != h_ul.shape:
            raise DomainError("h_dl and h_ul must be 1-D and of equal length")
        if np.any(h_dl < 0) or np.any(h_ul < 0):
            raise DomainError("channel gains must be non-negative")
        h_dl.setflags(write=False)
        h_ul.setflags(write=False)
        object.__setattr__(self, "h_dl", h_dl)
        object.__setattr__(self, "h_ul", h_ul)

    @property
    def K(self) -> int:
        return self.h_dl.size

    @classmethod
    def reciprocal(cls, gains, seed_tag=None) -> "ChannelRealization":
        """Build a realization whose uplink equals its downlink."""
        g = np.asarray(gains, dtype=float)
        return cls(h_dl=g, h_ul=g.copy(), seed_tag=seed_tag)

    def __eq__(self, other):
        if not isinstance(other, ChannelRealization):
            return NotImplemented
        return np.array_equal(self.h_dl, other.h_dl) and np.array_equal(
            self.h_ul, other.h_ul
        )

    __hash__ = None


def path_loss_gain(distance: float, gamma: float) -> float:
    """Deterministic large-scale gain ``distance ** -gamma``."""
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance}")
    if not gamma > 0:
        raise DomainError(f"path loss exponent must be positive, got {gamma}")
    return float(distance) ** (-float(gamma))


def trial_rng(base_seed: int, trial_index: int) -> np.random.Generator:
    if base_seed < 0 or trial_index < 0:
        raise DomainError("base_seed and trial_index must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(trial_index)]))


def unit_exponential(rng: np.random.Generator, size: int) -> np.ndarray:
    # Generator.random draws from [0, 1), so -log1p(-u) stays finite.
    u = rng.random(size)
    return -np.log1p(-u)


def sample_channel(topology: Topology, base_seed: int, trial_index: int) -> ChannelRealization:
    """Draw one block of reciprocal Rayleigh-faded power gains.

    User ``i`` always consumes the ``i``-th draw of the trial's stream, so
    topologies that share a prefix of users also share those users' fading.
    """
    rng = trial_rng(base_seed, trial_index)
    fading = unit_exponential(rng, topology.K)
    gains = fading * topology.mean_gains()
    return ChannelRealization.reciprocal(gains, seed_tag=(int(base_seed), int(trial_index)))
