"""One-dimensional search and polytope projection used by the solvers."""

from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a, b, tol=1e-7):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), evaluations)``."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        n += 1
    if fc >= fd:
        return c, fc, n
    return d, fd, n


def grid_then_golden(f, lo, hi, n_grid=64, tol=1e-7):
    """Coarse midpoint grid on ``(lo, hi)`` followed by golden section.

    The golden-section bracket is the pair of grid neighbours of the best grid
    point, so ``f`` only has to be unimodal near its maximum.
    """
    width = hi - lo
    xs = lo + (np.arange(n_grid) + 0.5) / n_grid * width
    ys = np.array([f(x) for x in xs])
    k = int(np.argmax(ys))
    a = xs[k - 1] if k > 0 else lo + 1e-12 * width
    b = xs[k + 1] if k < n_grid - 1 else hi - 1e-12 * width
    x, y, n = golden_section_max(f, a, b, tol)
    if ys[k] > y:
        return float(xs[k]), float(ys[k]), n + n_grid
    return x, y, n + n_grid


def project_capped_box(Y, W, lo, hi, budget):
    """Weighted projection of each row of ``Y`` onto ``{lo <= z <= hi, sum(z) <= budget}``.

    Solves ``min sum_k (z_k - y_k)**2 / w_k`` row by row. The minimizer is
    ``clip(y - mu * w, lo, hi)`` for the smallest ``mu >= 0`` meeting the budget;
    ``mu`` is located exactly among the clip breakpoints, where the clipped sum
    is piecewise linear. Requires ``K * lo <= budget`` and ``lo <= hi``.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    W = np.broadcast_to(np.asarray(W, dtype=float), Y.shape)
    Z = np.clip(Y, lo, hi)
    over = Z.sum(axis=1) > budget
    if not over.any():
        return Z
    y, w = Y[over], W[over]
    bp = np.concatenate([(y - hi) / w, (y - lo) / w], axis=1)
    bp = np.sort(np.maximum(bp, 0.0), axis=1)
    bp = np.concatenate([np.zeros((bp.shape[0], 1)), bp], axis=1)
    sums = np.clip(y[:, None, :] - bp[:, :, None] * w[:, None, :], lo, hi).sum(axis=2)
    j = np.argmax(sums <= budget, axis=1)
    r = np.arange(y.shape[0])
    mu0, mu1 = bp[r, j - 1], bp[r, j]
    g0, g1 = sums[r, j - 1], sums[r, j]
    mu = mu0 + (g0 - budget) * (mu1 - mu0) / (g0 - g1)
    Z[over] = np.clip(y - mu[:, None] * w, lo, hi)
    return Z
