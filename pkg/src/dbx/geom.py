"""
Numerical primitives
====================

Vectors, finite differences, Gauss-Legendre quadrature, monotone lookup
tables and a fixed-step Runge-Kutta integrator.  Every function here is
pure; evaluators are expected to broadcast over numpy arrays of parameters
and return arrays of shape ``(..., 3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    DomainError,
    IntegrationError,
    NonFiniteError,
    RegularityError,
    SingularCurvatureError,
)

EPS_REG = 1e-9
KAPPA_MIN = 1e-8

# Base step per derivative order for the fourth-order central stencils.
# Chosen to balance O(h^4) truncation against roundoff of order eps/h^k.
_FD_STEP = {1: 1e-3, 2: 5e-3, 3: 1e-2}
_FD_OFFSETS = {1: (-2, -1, 0, 1, 2), 2: (-2, -1, 0, 1, 2), 3: (-3, -2, -1, 0, 1, 2, 3)}

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def as_vec3(x) -> np.ndarray:
    """Return ``x`` as a finite float array of shape (3,)."""
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"non-finite vector {v}")
    return v


def norm(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def unit(v: np.ndarray) -> np.ndarray:
    return v / norm(v)[..., None]


@lru_cache(maxsize=None)
def stencil_weights(offsets: tuple, order: int) -> np.ndarray:
    """Finite-difference weights for the given integer offsets.

    Solves the Vandermonde moment system, so ``sum(w * f(x + k*h)) / h**order``
    approximates the ``order``-th derivative with accuracy
    ``len(offsets) - order``.
    """
    k = np.asarray(offsets, dtype=float)
    n = len(k)
    A = np.vander(k, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(math.factorial(order))
    return np.linalg.solve(A, rhs)


def _checked(values, what):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"non-finite evaluation of {what}")
    return values


@dataclass(frozen=True)
class CurveDef:
    """A parametric space curve ``t -> R^3`` on ``[t_min, t_max]``.

    ``derivatives`` optionally holds analytic evaluators for the first,
    second and third derivative; missing orders fall back to central
    differences.
    """

    evaluator: Callable
    t_min: float
    t_max: float
    derivatives: tuple = ()
    name: str = "curve"

    def __post_init__(self):
        if not (np.isfinite(self.t_min) and np.isfinite(self.t_max)) or self.t_max <= self.t_min:
            raise DomainError(f"bad curve domain [{self.t_min}, {self.t_max}]")

    def __call__(self, t):
        return _checked(self.evaluator(np.asarray(t, dtype=float)), self.name)

    def has_analytic(self, order: int) -> bool:
        return len(self.derivatives) >= order and self.derivatives[order - 1] is not None

    def speed(self, t):
        return norm(differentiate(self, t, 1))


def fd_step(t, order: int):
    # absolute below |t| = 1e3, relative above (keeps t + h representable)
    return _FD_STEP[order] * np.maximum(1.0, 1e-3 * np.abs(t))


def differentiate(curve: CurveDef, t, order: int = 1) -> np.ndarray:
    """Derivative of ``curve`` at ``t`` (scalar or array) of order 1..3.

    Analytic derivatives are used when the curve supplies them.  Otherwise a
    fourth-order central stencil is applied, which needs ``t`` to sit far
    enough inside the domain for the whole stencil to fit.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise NonFiniteError("non-finite parameter")
    if np.any(t < curve.t_min) or np.any(t > curve.t_max):
        raise DomainError(f"t outside [{curve.t_min}, {curve.t_max}]")
    if curve.has_analytic(order):
        return _checked(curve.derivatives[order - 1](t), f"{curve.name} derivative {order}")

    offsets = _FD_OFFSETS[order]
    h = fd_step(t, order)
    reach = max(offsets) * h
    if np.any(t - reach < curve.t_min) or np.any(t + reach > curve.t_max):
        raise DomainError(
            f"finite-difference stencil of half-width {np.max(reach):.3g} "
            f"leaves [{curve.t_min}, {curve.t_max}]"
        )
    w = stencil_weights(offsets, order)
    acc = 0.0
    for k, wk in zip(offsets, w):
        if wk != 0.0:
            acc = acc + wk * curve(t + k * h)
    return acc / (h ** order)[..., None]


def grid_derivative(values, h: float, axis: int = 0) -> np.ndarray:
    """First derivative of samples on a uniform grid of spacing ``h``.

    Fourth-order central differences in the interior and fourth-order
    one-sided stencils on the two points nearest each end.
    """
    y = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = y.shape[0]
    if n < 5:
        raise ValueError("need at least 5 samples")
    out = np.empty_like(y)
    wc = stencil_weights((-2, -1, 0, 1, 2), 1)
    out[2:-2] = (wc[0] * y[:-4] + wc[1] * y[1:-3] + wc[3] * y[3:-1] + wc[4] * y[4:]) / h
    for i, offs in ((0, (0, 1, 2, 3, 4)), (1, (-1, 0, 1, 2, 3))):
        w = stencil_weights(offs, 1)
        out[i] = sum(wk * y[i + k] for k, wk in zip(offs, w)) / h
        # mirrored stencil at the far end
        j = n - 1 - i
        out[j] = -sum(wk * y[j - k] for k, wk in zip(offs, w)) / h
    return np.moveaxis(out, 0, axis)


def uniform_spacing(grid, rtol: float = 1e-9) -> float:
    """Return the spacing of a uniform grid, raising if it is not uniform."""
    grid = np.asarray(grid, dtype=float)
    d = np.diff(grid)
    h = (grid[-1] - grid[0]) / (len(grid) - 1)
    if np.max(np.abs(d - h)) > rtol * max(abs(h), 1.0):
        raise ValueError("grid is not uniformly spaced")
    return float(h)


def _gl_panels(func, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(func(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("non-finite integrand")
    # roundoff floor of the rule; refining below it only chases noise
    floor = 64 * np.finfo(float).eps * np.abs(half) * (np.abs(vals) @ _GL_WEIGHTS)
    return half * (vals @ _GL_WEIGHTS), floor


def panel_integrals(func, breakpoints, rtol: float = 1e-12, max_depth: int = 6) -> np.ndarray:
    """Integral of ``func`` over each interval between consecutive breakpoints.

    Adaptive 16-point Gauss-Legendre: a panel is accepted once the whole-panel
    rule agrees with the two half-panel rules, otherwise both halves are
    refined independently.  ``func`` must broadcast over arrays.
    """
    x = np.asarray(breakpoints, dtype=float)
    n = len(x) - 1
    result = np.zeros(n)
    owner = np.arange(n)
    a, b = x[:-1].copy(), x[1:].copy()
    coarse, _ = _gl_panels(func, a, b)
    for _ in range(max_depth):
        m = 0.5 * (a + b)
        left, fl = _gl_panels(func, a, m)
        right, fr = _gl_panels(func, m, b)
        fine = left + right
        done = np.abs(fine - coarse) <= np.maximum(rtol * np.abs(fine), 2 * (fl + fr)) + 1e-300
        np.add.at(result, owner[done], fine[done])
        keep = ~done
        if not np.any(keep):
            return result
        owner = np.concatenate([owner[keep], owner[keep]])
        a, b = np.concatenate([a[keep], m[keep]]), np.concatenate([m[keep], b[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
    np.add.at(result, owner, coarse)
    return result


def _limit_slopes(x, y, slopes):
    # Fritsch-Carlson: keeps each Hermite segment monotone.
    m = np.array(slopes, dtype=float)
    delta = np.diff(y) / np.diff(x)
    m = np.maximum(m, 0.0)
    a = m[:-1] / delta
    b = m[1:] / delta
    r = np.hypot(a, b)
    bad = r > 3.0
    if np.any(bad):
        scale = np.ones_like(r)
        scale[bad] = 3.0 / r[bad]
        for i in np.nonzero(bad)[0]:
            m[i] = min(m[i], scale[i] * a[i] * delta[i])
            m[i + 1] = min(m[i + 1], scale[i] * b[i] * delta[i])
    return m


@dataclass(frozen=True)
class MonotoneTable:
    """Strictly increasing ``parameter -> value`` map with an inverse.

    Cubic Hermite interpolation between breakpoints.  When exact slopes are
    known (they usually are: speed for arc length, curvature for the
    contingency angle) they are used after Fritsch-Carlson limiting, which is
    what guarantees invertibility.
    """

    params: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    _fwd: Callable = field(init=False, repr=False, compare=False)
    _inv: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.params, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if len(p) < 2 or len(p) != len(v):
            raise ValueError("table needs matching parameter/value arrays of length >= 2")
        if np.any(np.diff(p) <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("table parameters and values must be strictly increasing")
        m = _limit_slopes(p, v, self.slopes)
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "slopes", m)
        object.__setattr__(self, "_fwd", CubicHermiteSpline(p, v, m))
        with np.errstate(divide="ignore"):
            inv_slopes = np.where(m > 0, 1.0 / np.where(m > 0, m, 1.0), 0.0)
        # a zero slope would be an infinite inverse slope; fall back to secant
        if np.any(m <= 0):
            inv_slopes = np.gradient(p, v)
        object.__setattr__(self, "_inv", CubicHermiteSpline(v, p, _limit_slopes(v, p, inv_slopes)))

    @classmethod
    def from_samples(cls, params, values, slopes=None):
        params = np.asarray(params, dtype=float)
        values = np.asarray(values, dtype=float)
        if len(params) >= 2 and (np.any(np.diff(params) <= 0) or np.any(np.diff(values) <= 0)):
            raise ValueError("table parameters and values must be strictly increasing")
        if slopes is None:
            slopes = np.gradient(values, params, edge_order=2)
        return cls(params, values, np.asarray(slopes, dtype=float))

    @property
    def param_range(self):
        return float(self.params[0]), float(self.params[-1])

    @property
    def value_range(self):
        return float(self.values[0]), float(self.values[-1])

    def _clip(self, x, lo, hi):
        x = np.asarray(x, dtype=float)
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise DomainError(f"lookup outside table range [{lo}, {hi}]")
        return np.clip(x, lo, hi)

    def __call__(self, p):
        return self._fwd(self._clip(p, *self.param_range))

    def inverse(self, v):
        return self._inv(self._clip(v, *self.value_range))

    def derivative(self, p):
        return self._fwd(self._clip(p, *self.param_range), 1)


def arc_length_table(curve: CurveDef, n: int = 256, t_range: Optional[Sequence[float]] = None) -> MonotoneTable:
    """Table of ``(t, s(t))`` with ``s(t_min) = 0``.

    Speed is integrated panel by panel with adaptive Gauss-Legendre
    quadrature.  A speed at or below ``EPS_REG`` anywhere on the quadrature
    nodes raises :class:`RegularityError` naming the offending parameter.
    """
    if n < 16:
        raise ValueError("arc_length_table needs n >= 16")
    t0, t1 = (curve.t_min, curve.t_max) if t_range is None else map(float, t_range)
    t = np.linspace(t0, t1, n + 1)

    def speed(tt):
        sp = curve.speed(tt)
        low = sp <= EPS_REG
        if np.any(low):
            bad = float(np.asarray(tt)[low].flat[0])
            raise RegularityError(f"curve '{curve.name}' is not regular at t={bad:.17g}", where=bad)
        return sp

    s = np.concatenate([[0.0], np.cumsum(panel_integrals(speed, t))])
    return MonotoneTable(t, s, speed(t))


def theta_table(kappa: Callable, s_range: Sequence[float], n: int = 256, kappa_min: float = KAPPA_MIN) -> MonotoneTable:
    """Table of the contingency angle ``theta(s) = int kappa ds`` with ``theta(s_min) = 0``.

    Raises :class:`SingularCurvatureError` if the curvature drops below
    ``kappa_min`` at any breakpoint or quadrature node.
    """
    if n < 16:
        raise ValueError("theta_table needs n >= 16")
    s0, s1 = map(float, s_range)
    s = np.linspace(s0, s1, n + 1)

    def k(ss):
        vals = np.asarray(kappa(ss), dtype=float) * np.ones_like(ss)
        low = vals < kappa_min
        if np.any(low):
            bad = float(np.asarray(ss)[low].flat[0])
            raise SingularCurvatureError(
                f"curvature {vals[low].flat[0]:.3g} below {kappa_min:g} at s={bad:.17g}", where=bad
            )
        return vals

    theta = np.concatenate([[0.0], np.cumsum(panel_integrals(k, s))])
    return MonotoneTable(s, theta, k(s))


def rk4_integrate(rhs: Callable, y0, grid, post_step: Optional[Callable] = None) -> np.ndarray:
    """Classical fixed-step RK4 over the points of ``grid``.

    ``rhs(x, y)`` returns ``dy/dx``.  ``post_step`` may project each new state
    (used to re-orthonormalize frames).  A non-finite state aborts with
    :class:`IntegrationError` carrying the last good abscissa.
    """
    grid = np.asarray(grid, dtype=float)
    y = np.array(y0, dtype=float)
    out = np.empty((len(grid),) + y.shape)
    out[0] = y
    for i in range(len(grid) - 1):
        x, h = grid[i], grid[i + 1] - grid[i]
        # overflow surfaces as a non-finite state, checked below
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = rhs(x, y)
            k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(x + h, y + h * k3)
            y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError(f"non-finite state after x={x:.17g}", last_good=float(x))
        if post_step is not None:
            y_new = post_step(y_new)
        out[i + 1] = y = y_new
    return out


def nearest_rotation(rows: np.ndarray) -> np.ndarray:
    """Project a 3x3 matrix onto the nearest matrix with orthonormal rows."""
    u, _, vt = np.linalg.svd(rows)
    return u @ vt
