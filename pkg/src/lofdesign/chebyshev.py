"""Chebyshev polynomials of the first kind: evaluation, extrema, weighted integrals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .measures import WeightFunction

# Degrees are guarded at 2k-3 with k <= 32; not a mathematical limit.
MAX_K = 32
MAX_DEGREE = 2 * MAX_K - 3

_X_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ExtremalGrid:
    """The k extremal points of T_{k-1} on [-1, 1], in increasing order."""

    k: int
    points: np.ndarray


def _check_degree(j) -> int:
    j = int(j)
    if j < 0 or j > MAX_DEGREE:
        raise ValueError(f"polynomial degree must be in [0, {MAX_DEGREE}], got {j}")
    return j


def eval_t(j: int, x):
    """Evaluate T_j(x) = cos(j arccos x) for x in [-1, 1].

    Accepts a scalar or array ``x``; values beyond the interval by more than
    1e-12 raise, values within that slack are clamped.
    """
    j = _check_degree(j)
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + _X_SLACK):
        raise ValueError("evaluation point outside [-1, 1]")
    out = np.cos(j * np.arccos(np.clip(xa, -1.0, 1.0)))
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def eval_t_recurrence(j: int, x):
    """Evaluate T_j via the three-term recurrence; cross-check for eval_t."""
    j = _check_degree(j)
    xa = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    t_prev = np.ones_like(xa)
    if j == 0:
        out = t_prev
    else:
        t_cur = xa.copy()
        for _ in range(j - 1):
            t_prev, t_cur = t_cur, 2.0 * xa * t_cur - t_prev
        out = t_cur
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def extrema(k: int) -> ExtremalGrid:
    """Extremal points cos(pi (k-1-i)/(k-1)), i = 0..k-1, of T_{k-1}.

    The grid is exactly symmetric about 0 with endpoints at -1 and 1 (the
    upper half is mirrored onto the lower half rather than recomputed).
    """
    k = int(k)
    if k < 2:
        raise ValueError(f"need k >= 2 extremal points, got k={k}")
    if k > MAX_K:
        raise ValueError(f"k={k} exceeds the supported bound {MAX_K}")
    pts = np.empty(k)
    for i in range(k // 2, k):
        pts[i] = np.cos(np.pi * (k - 1 - i) / (k - 1))
        pts[k - 1 - i] = -pts[i]
    if k % 2 == 1:
        pts[(k - 1) // 2] = 0.0
    pts[-1] = 1.0
    pts[0] = -1.0
    return ExtremalGrid(k=k, points=pts)


def chebyshev_spaced(n: int) -> np.ndarray:
    """n points cos(pi j/(n-1)) in increasing order, denser near the endpoints."""
    if n < 2:
        raise ValueError("need at least 2 grid points")
    return np.cos(np.pi * np.arange(n - 1, -1, -1) / (n - 1))


def weighted_integral(v: "WeightFunction", j: int) -> float:
    """Integral of T_j against the weight density over [-1, 1].

    Uses closed forms for the built-in uniform and arcsine weights and the
    weight's own quadrature strategy otherwise.
    """
    j = _check_degree(j)
    if v.kind == "uniform":
        return 0.0 if j % 2 else 2.0 / (1.0 - j * j)
    if v.kind == "arcsine":
        return 2.0 if j == 0 else 0.0
    return weighted_integral_by_quadrature(v, j)


def weighted_integral_by_quadrature(v: "WeightFunction", j: int) -> float:
    """Same integral, always through the weight's quadrature strategy."""
    j = _check_degree(j)
    return v.integrate(lambda x: eval_t(j, x))
