"""Design measures on [-1, 1] and the functionals computed from them.

A design measure is a probability measure with finitely many atoms plus an
absolutely continuous part given as (scale x normalized weight density).
This module provides the measure algebra used everywhere else: moment
matrices, the lack-of-fit efficiency of a design, the power functional of a
regression alternative, the CDF/quantile pair, and quantile discretization
to n design points.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConditioningError, SingularInformationError
from .quadrature import adaptive_gauss_legendre

_MASS_TOL = 1e-12
_LOAD_MASS_TOL = 1e-9
_MIN_ATOM_GAP = 1e-12
_NORMALIZATION_TOL = 1e-8
_RCOND_THRESHOLD = 1e-12
_NEGATIVE_CLAMP = -1e-10
_DENSITY_FLOOR = 1e-14

UNIFORM = "uniform"
ARCSINE = "arcsine"
USER = "user"


def _vectorized(fn: Callable) -> Callable:
    """Return a callable that maps float arrays to float arrays."""
    probe = np.array([-0.5, 0.25])
    try:
        out = np.asarray(fn(probe), dtype=float)
        if out.shape == probe.shape:
            return lambda x: np.asarray(fn(x), dtype=float)
    except Exception:
        pass
    vf = np.vectorize(fn, otypes=[float])
    return lambda x: vf(x)


def _uniform_density(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _arcsine_density(x):
    xa = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return 2.0 / (np.pi * np.sqrt(1.0 - xa * xa))


class WeightFunction:
    """Nonnegative density v on [-1, 1], normalized so mean(v) over the interval is 1.

    The normalization is against the uniform distribution: (1/2) * integral
    of v over [-1, 1] equals 1.  Each instance carries its own integration
    strategy: closed forms for the built-in kinds, adaptive Gauss-Legendre
    (split at declared jump points) for user densities, and the cosine
    substitution for the arcsine weight whose density is unbounded at the
    endpoints.
    """

    def __init__(self, kind: str, density: Callable, jump_points=(),
                 grid=None, _skip_normalization_check: bool = False):
        if kind not in (UNIFORM, ARCSINE, USER):
            raise ValueError(f"unknown weight kind {kind!r}")
        self.kind = kind
        self.density = _vectorized(density)
        self.jump_points = tuple(sorted(float(t) for t in jump_points))
        if any(not -1.0 < t < 1.0 for t in self.jump_points):
            raise ValueError("jump points must lie strictly inside (-1, 1)")
        self.grid = grid
        self._cdf_table = self._build_cdf_table() if kind == USER else None
        self.normalization_cert = self.expectation(lambda x: np.ones_like(x))
        if not _skip_normalization_check and \
                abs(self.normalization_cert - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(
                f"weight density integrates to {self.normalization_cert:.12g} "
                "against the uniform distribution; expected 1"
            )

    def integrate(self, fn: Callable, tol: float = 1e-11) -> float:
        """Integral of fn(x) * v(x) dx over [-1, 1]."""
        fn = _vectorized(fn)
        if self.kind == ARCSINE:
            # x = cos(theta) removes the endpoint singularity of the density.
            return (2.0 / np.pi) * adaptive_gauss_legendre(
                lambda th: fn(np.cos(th)), 0.0, np.pi, tol=tol * np.pi / 2.0)
        dens = self.density
        return adaptive_gauss_legendre(
            lambda x: fn(x) * dens(x), -1.0, 1.0, tol=tol,
            breakpoints=self.jump_points)

    def expectation(self, fn: Callable, tol: float = 1e-11) -> float:
        """Integral of fn against v d(uniform distribution), i.e. integrate(fn)/2."""
        return 0.5 * self.integrate(fn, tol=tol)

    def power_moment(self, j: int) -> float:
        """Moment of x^j against v d(uniform distribution); closed form where known."""
        j = int(j)
        if self.kind == UNIFORM:
            return 0.0 if j % 2 else 1.0 / (j + 1.0)
        if self.kind == ARCSINE:
            return 0.0 if j % 2 else comb(j, j // 2) / 2.0 ** j
        return self.expectation(lambda x: x ** j)

    def mass_below(self, t: float) -> float:
        """Mass of v d(uniform distribution) on [-1, t]."""
        t = float(t)
        if t <= -1.0:
            return 0.0
        if t >= 1.0:
            return self.normalization_cert
        if self.kind == UNIFORM:
            return 0.5 * (t + 1.0)
        if self.kind == ARCSINE:
            return 1.0 - np.arccos(t) / np.pi
        edges, cum = self._cdf_table
        i = int(np.searchsorted(edges, t, side="right")) - 1
        i = min(max(i, 0), len(edges) - 2)
        dens = self.density
        partial = 0.0
        if t > edges[i]:
            partial = adaptive_gauss_legendre(dens, edges[i], t, tol=1e-12)
        return 0.5 * (cum[i] + partial)

    def _build_cdf_table(self, panels_per_unit: int = 256):
        edges = np.unique(np.concatenate([
            np.linspace(-1.0, 1.0, 2 * panels_per_unit + 1),
            np.asarray(self.jump_points, dtype=float),
        ]))
        dens = self.density
        vals = [adaptive_gauss_legendre(dens, a, b, tol=1e-13)
                for a, b in zip(edges[:-1], edges[1:])]
        cum = np.concatenate([[0.0], np.cumsum(vals)])
        return edges, cum

    def __repr__(self):
        return f"WeightFunction(kind={self.kind!r}, jumps={self.jump_points})"


def uniform_weight() -> WeightFunction:
    """The constant weight v(x) = 1."""
    return WeightFunction(UNIFORM, _uniform_density)


def arcsine_weight() -> WeightFunction:
    """The arcsine weight v(x) = 2 / (pi sqrt(1 - x^2))."""
    return WeightFunction(ARCSINE, _arcsine_density)


def user_weight(density: Callable, jump_points=(), grid=None) -> WeightFunction:
    """Wrap a raw nonnegative density, renormalizing it internally.

    Returns a WeightFunction whose density integrates to 1 against the
    uniform distribution; the pre-normalization total is kept in the
    ``renormalization_factor`` attribute so callers can warn on large drift.
    """
    raw = WeightFunction(USER, density, jump_points=jump_points, grid=grid,
                         _skip_normalization_check=True)
    total = raw.normalization_cert
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError(f"density has non-positive or non-finite total mass {total}")
    dens = raw.density
    wf = WeightFunction(USER, lambda x: dens(x) / total,
                        jump_points=jump_points, grid=grid)
    wf.renormalization_factor = total
    return wf


def grid_weight(samples: Sequence[Sequence[float]]) -> WeightFunction:
    """Weight from two-column (x, v(x)) samples, linearly interpolated.

    The interpolated density is renormalized on load; a renormalization
    factor off 1 by more than 1e-3 triggers a warning.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("grid weight needs at least two (x, v) rows")
    order = np.argsort(arr[:, 0])
    xs, vs = arr[order, 0], arr[order, 1]
    if np.any(vs < 0):
        raise ValueError("grid weight density must be nonnegative")
    wf = user_weight(lambda x: np.interp(x, xs, vs),
                     grid=[[float(a), float(b)] for a, b in zip(xs, vs)])
    if abs(wf.renormalization_factor - 1.0) > 1e-3:
        warnings.warn(
            f"grid weight renormalized by factor {1.0 / wf.renormalization_factor:.6g}",
            stacklevel=2)
    return wf


@dataclass(frozen=True, eq=False)
class DesignMeasure:
    """Probability measure on [-1, 1]: atoms plus scale x weight-density part."""

    atoms: tuple[tuple[float, float], ...]
    ac_scale: float = 0.0
    ac_density: WeightFunction | None = None

    @property
    def atom_locations(self) -> np.ndarray:
        return np.array([t for t, _ in self.atoms])

    @property
    def atom_masses(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])


def design_measure(atoms, ac_scale: float = 0.0,
                   ac_density: WeightFunction | None = None) -> DesignMeasure:
    """Validate and build a DesignMeasure.

    ``atoms`` is a sequence of (location, mass) pairs with positive masses at
    pairwise-distinct locations in [-1, 1]; total mass including ``ac_scale``
    must be 1 within 1e-12.
    """
    ac_scale = float(ac_scale)
    if not 0.0 <= ac_scale <= 1.0:
        raise ValueError(f"density share must be in [0, 1], got {ac_scale}")
    if ac_scale > 0.0 and ac_density is None:
        raise ValueError("a positive density share requires a weight function")
    if ac_scale == 0.0:
        ac_density = None
    cleaned = []
    for t, p in atoms:
        t, p = float(t), float(p)
        if abs(t) > 1.0 + 1e-12:
            raise ValueError(f"atom location {t} outside [-1, 1]")
        if p <= 0.0:
            raise ValueError(f"atom mass must be positive, got {p}")
        cleaned.append((min(max(t, -1.0), 1.0), p))
    cleaned.sort()
    for (t1, _), (t2, _) in zip(cleaned[:-1], cleaned[1:]):
        if t2 - t1 < _MIN_ATOM_GAP:
            raise ValueError(f"atom locations {t1} and {t2} are not distinct")
    total = sum(p for _, p in cleaned) + ac_scale
    if abs(total - 1.0) > _MASS_TOL:
        raise ValueError(f"total mass {total:.15g} differs from 1 beyond 1e-12")
    return DesignMeasure(atoms=tuple(cleaned), ac_scale=ac_scale,
                         ac_density=ac_density)


@dataclass(frozen=True)
class PolynomialModel:
    """Polynomial regression with k coefficients (degree k-1) on [-1, 1]."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"model needs k >= 2 coefficients, got {self.k}")

    def regressors(self, x):
        """Vector (1, x, ..., x^(k-1)); row-stacked for array input."""
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        v = np.vander(xa, self.k, increasing=True)
        return v[0] if np.isscalar(x) or np.asarray(x).ndim == 0 else v

    def design_matrix(self, points) -> np.ndarray:
        return np.vander(np.asarray(points, dtype=float), self.k, increasing=True)

    @property
    def e_k(self) -> np.ndarray:
        e = np.zeros(self.k)
        e[-1] = 1.0
        return e


@dataclass(frozen=True)
class RegressionFunction:
    """A bounded regression function on [-1, 1] with a printable description."""

    eval: Callable
    description: str = field(default="", compare=False)


def regression_function(fn: Callable, description: str = "") -> RegressionFunction:
    """Wrap a callable (vectorizing it if needed) as a RegressionFunction."""
    if isinstance(fn, RegressionFunction):
        return fn
    return RegressionFunction(eval=_vectorized(fn), description=description)


def _eval_of(g) -> Callable:
    return regression_function(g).eval


def reciprocal_condition(m: np.ndarray) -> float:
    """Smallest over largest singular value; 0 for an exactly singular matrix."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def measure_integral(xi: DesignMeasure, fn: Callable) -> float:
    """Integral of fn against the design measure."""
    fn = _vectorized(fn)
    total = 0.0
    if xi.atoms:
        total += float(np.dot(xi.atom_masses, fn(xi.atom_locations)))
    if xi.ac_scale > 0.0:
        total += xi.ac_scale * xi.ac_density.expectation(fn)
    return total


def moment_matrix(xi: DesignMeasure, model: PolynomialModel) -> np.ndarray:
    """Moment (information) matrix of the polynomial regressors under xi.

    Assembled from the power moments m_0..m_{2k-2}, so the result is exactly
    symmetric and Hankel: entry (a, b) only depends on a + b.
    """
    k = model.k
    m = np.zeros(2 * k - 1)
    if xi.atoms:
        powers = np.vander(xi.atom_locations, 2 * k - 1, increasing=True)
        m += powers.T @ xi.atom_masses
    if xi.ac_scale > 0.0:
        m += xi.ac_scale * np.array(
            [xi.ac_density.power_moment(j) for j in range(2 * k - 1)])
    idx = np.arange(k)
    return m[np.add.outer(idx, idx)]


def lof_efficiency(xi: DesignMeasure, v: WeightFunction,
                   grid_size: int = 4096) -> float:
    """Largest t such that t * (v-weighted uniform) is dominated by xi.

    Atoms contribute nothing; the value is the infimum of the density ratio
    ac_scale * ac_density / v over a Chebyshev-spaced grid, refined around
    declared jump points of either density and restricted to points where v
    is positive.
    """
    if not isinstance(v, WeightFunction):
        raise ValueError("efficiency reference must be a WeightFunction")
    if xi.ac_scale <= 0.0 or xi.ac_density is None:
        return 0.0
    from .chebyshev import chebyshev_spaced
    pts = [chebyshev_spaced(grid_size)]
    jumps = set(v.jump_points) | set(xi.ac_density.jump_points)
    if jumps:
        offsets = np.geomspace(1e-12, 1e-2, 8)
        for t in jumps:
            pts.append(np.clip(t + offsets, -1.0, 1.0))
            pts.append(np.clip(t - offsets, -1.0, 1.0))
    x = np.unique(np.concatenate(pts))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ref = v.density(x)
        own = xi.ac_density.density(x)
    mask = np.isfinite(ref) & (ref > _DENSITY_FLOOR)
    if not np.any(mask):
        raise ValueError("reference weight vanishes on the whole grid")
    ratio = xi.ac_scale * own[mask] / ref[mask]
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    return float(min(max(ratio.min(), 0.0), 1.0))


def b_functional(g, xi: DesignMeasure, sigma2: float,
                 model: PolynomialModel) -> float:
    """Squared residual norm of g after projection onto the model span, over sigma^2.

    This is the quantity that scales the asymptotic power of lack-of-fit
    tests under the alternative g: zero exactly when g lies in the span of
    the regressors in L2(xi).
    """
    if sigma2 <= 0.0:
        raise ValueError(f"variance must be positive, got {sigma2}")
    geval = _eval_of(g)
    m = moment_matrix(xi, model)
    if reciprocal_condition(m) < _RCOND_THRESHOLD:
        raise SingularInformationError(
            "information matrix numerically singular; projection ill-posed")
    rhs = np.array([measure_integral(xi, lambda x, j=j: geval(x) * x ** j)
                    for j in range(model.k)])
    g_sq = measure_integral(xi, lambda x: geval(x) ** 2)
    value = (g_sq - float(rhs @ np.linalg.solve(m, rhs))) / sigma2
    if value < _NEGATIVE_CLAMP:
        raise ConditioningError(
            f"projection residual {value:.3e} is negative beyond round-off")
    return max(value, 0.0)


def cdf(xi: DesignMeasure, t: float) -> float:
    """Right-continuous distribution function of xi at t."""
    t = float(t)
    if t < -1.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    total = 0.0
    if xi.atoms:
        idx = int(np.searchsorted(xi.atom_locations, t, side="right"))
        total += float(xi.atom_masses[:idx].sum())
    if xi.ac_scale > 0.0:
        total += xi.ac_scale * xi.ac_density.mass_below(t)
    return min(total, 1.0)


def quantile(xi: DesignMeasure, u: float) -> float:
    """Right-continuous inverse of the CDF: inf{t : F(t) > u}, with Q(1) = 1.

    Bisection to 1e-12 on continuous segments; results within 1e-9 of an
    atom or interval endpoint snap to it exactly.
    """
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"quantile level must be in [0, 1], got {u}")
    if u >= 1.0:
        return 1.0
    if cdf(xi, -1.0) > u:
        return -1.0
    lo, hi = -1.0, 1.0
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if cdf(xi, mid) > u:
            hi = mid
        else:
            lo = mid
    # Snap to an atom or endpoint caught in the final bracket.
    for t in (*xi.atom_locations, -1.0, 1.0):
        if lo - 1e-15 <= t <= hi + 1e-15:
            return float(t)
    return min(max(hi, -1.0), 1.0)


def discretize(xi: DesignMeasure, n: int) -> np.ndarray:
    """The n quantiles Q(i/(n-1)), i = 0..n-1, as a nondecreasing array.

    The empirical measure of the output converges uniformly to xi as n
    grows, which is what makes these point sets usable as exact designs.
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"need n >= 2 design points, got {n}")
    pts = np.array([quantile(xi, i / (n - 1)) for i in range(n)])
    return np.maximum.accumulate(pts)


# -- document format ---------------------------------------------------------

def weight_to_spec(wf: WeightFunction):
    """Serializable form of a weight: its kind name or a density grid."""
    if wf.kind in (UNIFORM, ARCSINE):
        return wf.kind
    if wf.grid is not None:
        return {"grid": [[float(a), float(b)] for a, b in wf.grid]}
    xs = np.linspace(-1.0, 1.0, 513)
    return {"grid": [[float(x), float(d)] for x, d in zip(xs, wf.density(xs))]}


def weight_from_spec(spec) -> WeightFunction:
    """Inverse of weight_to_spec; accepts 'uniform', 'arcsine', or {'grid': rows}."""
    if spec == UNIFORM:
        return uniform_weight()
    if spec == ARCSINE:
        return arcsine_weight()
    if isinstance(spec, dict) and "grid" in spec:
        return grid_weight(spec["grid"])
    raise ValueError(f"unrecognized weight specification {spec!r}")


def design_to_dict(xi: DesignMeasure, k: int | None = None) -> dict:
    """Flat document form of a design measure."""
    doc: dict = {}
    if k is not None:
        doc["k"] = int(k)
    doc["atoms"] = [{"t": float(t), "p": float(p)} for t, p in xi.atoms]
    ac: dict = {"scale": float(xi.ac_scale)}
    if xi.ac_scale > 0.0:
        ac["weight"] = weight_to_spec(xi.ac_density)
    doc["ac"] = ac
    return doc


def design_from_dict(doc: dict) -> DesignMeasure:
    """Parse the document form; masses must sum to 1 within 1e-9 (then renormalized)."""
    atoms = [(float(a["t"]), float(a["p"])) for a in doc.get("atoms", [])]
    ac = doc.get("ac", {}) or {}
    scale = float(ac.get("scale", 0.0))
    total = sum(p for _, p in atoms) + scale
    if abs(total - 1.0) > _LOAD_MASS_TOL:
        raise ValueError(f"design masses sum to {total:.12g}, expected 1 +- 1e-9")
    atoms = [(t, p / total) for t, p in atoms]
    scale /= total
    density = weight_from_spec(ac["weight"]) if scale > 0.0 else None
    return design_measure(atoms, ac_scale=scale, ac_density=density)


def load_design(path) -> DesignMeasure:
    return design_from_dict(json.loads(Path(path).read_text()))


def save_design(xi: DesignMeasure, path, k: int | None = None) -> None:
    Path(path).write_text(json.dumps(design_to_dict(xi, k=k), indent=2))
