"""
Frenet and Darboux apparatus
============================

Curves either lie on an explicit parametric surface (:class:`CurveOnSurface`)
or are synthesized from abstract curvature data by integrating the moving
frame equations (:func:`darboux_from_abstract`).  Both routes produce a
:class:`SampledCurve`, a sequence of :class:`DarbouxSample` records on a
uniform arc-length grid.

Sign conventions: ``g = n x T``, ``k_g = <T', g>``, ``k_n = <T', n>``,
``t_g = <g', n>`` and ``alpha = atan2(k_n, k_g)`` so that
``k_g = kappa cos(alpha)`` and ``k_n = kappa sin(alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from . import geom
from .errors import (
    DomainError,
    FrameDriftError,
    FrameUndefinedError,
    RegularityError,
    SingularCurvatureError,
)
from .geom import KAPPA_MIN, CurveDef, MonotoneTable, dot, norm, unit

FRAME_DRIFT_BUDGET = 1e-6
_SURF_FD_STEP = 1e-3


@dataclass(frozen=True)
class SurfacePatch:
    """Parametric surface ``(u, v) -> R^3`` with a unit normal field.

    If ``normal_fn`` is omitted the normal is ``orientation * unit(S_u x S_v)``.
    ``orientation_label`` records the convention in reports, since the signs
    of ``k_n``, ``alpha`` flip with it.
    """

    evaluator: Callable
    u_range: tuple = (-np.inf, np.inf)
    v_range: tuple = (-np.inf, np.inf)
    partials: Optional[Callable] = None
    normal_fn: Optional[Callable] = None
    orientation: int = 1
    orientation_label: str = "Su x Sv"
    name: str = "surface"

    def __call__(self, u, v):
        return np.asarray(self.evaluator(np.asarray(u, float), np.asarray(v, float)), dtype=float)

    def _check_domain(self, u, v):
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        if np.any(u < u0) or np.any(u > u1) or np.any(v < v0) or np.any(v > v1):
            raise DomainError(f"(u, v) outside the domain of {self.name}")

    def partial_derivatives(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        self._check_domain(u, v)
        if self.partials is not None:
            su, sv = self.partials(u, v)
            return np.asarray(su, float), np.asarray(sv, float)
        return _fd2(self.__call__, u, v)

    def normal(self, u, v):
        su, sv = self.partial_derivatives(u, v)
        cross = np.cross(su, sv)
        mag = norm(cross)
        if np.any(mag <= geom.EPS_REG):
            raise RegularityError(f"{self.name} is singular: |S_u x S_v| = {np.min(mag):.3g}")
        if self.normal_fn is not None:
            return unit(np.asarray(self.normal_fn(np.asarray(u, float), np.asarray(v, float)), float))
        return self.orientation * cross / mag[..., None]

    def normal_partials(self, u, v):
        return _fd2(self.normal, np.asarray(u, float), np.asarray(v, float))


def _fd2(fn, u, v):
    w = geom.stencil_weights((-2, -1, 0, 1, 2), 1)
    hu = _SURF_FD_STEP * np.maximum(1.0, 1e-3 * np.abs(u))
    hv = _SURF_FD_STEP * np.maximum(1.0, 1e-3 * np.abs(v))
    du = sum(wk * fn(u + k * hu, v) for k, wk in zip((-2, -1, 1, 2), w[[0, 1, 3, 4]]))
    dv = sum(wk * fn(u, v + k * hv) for k, wk in zip((-2, -1, 1, 2), w[[0, 1, 3, 4]]))
    return du / hu[..., None], dv / hv[..., None]


@dataclass(frozen=True)
class CurveOnSurface:
    """A curve ``t -> (u(t), v(t))`` in the parameter domain of ``surface``.

    ``space_curve`` may carry analytic derivatives of the induced curve;
    otherwise the composition ``S(u(t), v(t))`` is differentiated numerically.
    """

    surface: SurfacePatch
    path: Callable
    t_min: float
    t_max: float
    path_derivative: Optional[Callable] = None
    space_curve: Optional[CurveDef] = None
    name: str = "curve"

    @cached_property
    def curve(self) -> CurveDef:
        if self.space_curve is not None:
            return self.space_curve
        return CurveDef(lambda t: self.surface(*self.path(t)), self.t_min, self.t_max, name=self.name)

    def uv(self, t):
        u, v = self.path(np.asarray(t, float))
        t = np.asarray(t, float)
        return np.broadcast_to(u, t.shape).astype(float), np.broadcast_to(v, t.shape).astype(float)

    def uv_rate(self, t):
        t = np.asarray(t, float)
        if self.path_derivative is not None:
            du, dv = self.path_derivative(t)
        else:
            w = geom.stencil_weights((-2, -1, 0, 1, 2), 1)
            h = geom.fd_step(t, 1)
            pts = [np.asarray(self.path(t + k * h), float) for k in (-2, -1, 1, 2)]
            du, dv = sum(wk * p for wk, p in zip(w[[0, 1, 3, 4]], pts)) / h
        return np.broadcast_to(du, t.shape).astype(float), np.broadcast_to(dv, t.shape).astype(float)

    def normal(self, t):
        return self.surface.normal(*self.uv(t))

    def normal_rate(self, t):
        """``d n / dt`` along the curve via the chain rule."""
        u, v = self.uv(t)
        du, dv = self.uv_rate(t)
        nu, nv = self.surface.normal_partials(u, v)
        return nu * du[..., None] + nv * dv[..., None]


@dataclass(frozen=True)
class FrenetApparatus:
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: float
    tau: float


@dataclass(frozen=True)
class DarbouxSample:
    """Frame data of a curve at one arc-length sample.

    ``N`` and ``B`` are the Frenet normal and binormal; they are kept so the
    rotation relating the two frames can be verified.
    """

    s: float
    theta: float
    position: np.ndarray
    T: np.ndarray
    g: np.ndarray
    n: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: float
    tau: float
    k_g: float
    k_n: float
    t_g: float
    alpha: float


_FIELDS = ("s", "theta", "position", "T", "g", "n", "N", "B", "kappa", "tau", "k_g", "k_n", "t_g", "alpha")


@dataclass(frozen=True)
class SampledCurve:
    """Immutable sequence of :class:`DarbouxSample` on a uniform s-grid."""

    samples: tuple
    orientation: str = "unspecified"
    label: str = "curve"

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(x, name) for x in self.samples], dtype=float)

    def __getattr__(self, name):
        if name in _FIELDS:
            cache = self.__dict__.setdefault("_columns", {})
            if name not in cache:
                cache[name] = self.column(name)
            return cache[name]
        raise AttributeError(name)

    @property
    def length(self) -> float:
        s = self.column("s")
        return float(s[-1] - s[0])

    @classmethod
    def from_arrays(cls, orientation="unspecified", label="curve", **cols):
        n = len(cols["s"])
        samples = tuple(
            DarbouxSample(**{k: (np.array(cols[k][i]) if np.ndim(cols[k][i]) else float(cols[k][i])) for k in _FIELDS})
            for i in range(n)
        )
        return cls(samples, orientation, label)


def as_sampled(samples) -> SampledCurve:
    if isinstance(samples, SampledCurve):
        return samples
    return SampledCurve(tuple(samples))


def _frenet_t(curve: CurveDef, t):
    d1 = geom.differentiate(curve, t, 1)
    d2 = geom.differentiate(curve, t, 2)
    d3 = geom.differentiate(curve, t, 3)
    speed = norm(d1)
    if np.any(speed <= geom.EPS_REG):
        raise RegularityError(f"curve '{curve.name}' is not regular")
    c = np.cross(d1, d2)
    cn = norm(c)
    kappa = cn / speed**3
    low = kappa < KAPPA_MIN
    if np.any(low):
        where = float(np.asarray(t)[low].flat[0]) if np.ndim(t) else float(t)
        raise FrameUndefinedError(f"curvature vanishes on '{curve.name}' near t={where:.6g}", where=where)
    T = d1 / speed[..., None]
    B = c / cn[..., None]
    N = np.cross(B, T)
    tau = dot(c, d3) / cn**2
    return speed, T, N, B, kappa, tau


def frenet_apparatus(curve: CurveDef, s: float, arc: Optional[MonotoneTable] = None) -> FrenetApparatus:
    """Frenet frame, curvature and torsion at arc length ``s`` from ``t_min``."""
    arc = arc or geom.arc_length_table(curve)
    t = float(arc.inverse(s))
    _, T, N, B, kappa, tau = _frenet_t(curve, t)
    return FrenetApparatus(T, N, B, float(kappa), float(tau))


def _darboux_t(cos: CurveOnSurface, t):
    curve = cos.curve
    speed, T, N, B, kappa, tau = _frenet_t(curve, t)
    n = cos.normal(t)
    g = unit(np.cross(n, T))
    k_g = kappa * dot(N, g)
    k_n = kappa * dot(N, n)
    t_g = -dot(cos.normal_rate(t) / speed[..., None], g)
    alpha = np.arctan2(k_n, k_g)
    return dict(position=curve(t), T=T, g=g, n=n, N=N, B=B, kappa=kappa, tau=tau, k_g=k_g, k_n=k_n, t_g=t_g, alpha=alpha)


def darboux_frame(cos: CurveOnSurface, s: float, arc: Optional[MonotoneTable] = None,
                  theta: Optional[MonotoneTable] = None) -> DarbouxSample:
    """Darboux frame of ``cos`` at arc length ``s`` (measured from ``t_min``)."""
    curve = cos.curve
    arc = arc or geom.arc_length_table(curve)
    if theta is None:
        theta = geom.theta_table(lambda ss: _frenet_t(curve, arc.inverse(ss))[4], arc.value_range)
    t = float(arc.inverse(s))
    d = _darboux_t(cos, t)
    return DarbouxSample(s=float(s), theta=float(theta(s)), **{k: (v if np.ndim(v) else float(v)) for k, v in d.items()})


def sample_curve(cos: CurveOnSurface, n: int = 256, t_range: Optional[Sequence[float]] = None) -> SampledCurve:
    """Sample ``cos`` at ``n`` points uniformly spaced in arc length."""
    if n < 8:
        raise ValueError("need at least 8 samples")
    curve = cos.curve
    t_range = (cos.t_min, cos.t_max) if t_range is None else t_range
    arc = geom.arc_length_table(curve, max(64, n), t_range)
    length = arc.value_range[1]
    s = np.linspace(0.0, length, n)
    t = arc.inverse(s)
    t[0], t[-1] = arc.param_range
    theta = geom.theta_table(lambda ss: _frenet_t(curve, arc.inverse(ss))[4], (0.0, length), max(64, n))
    d = _darboux_t(cos, t)
    d["alpha"] = np.unwrap(d["alpha"])
    return SampledCurve.from_arrays(
        orientation=cos.surface.orientation_label, label=cos.name, s=s, theta=theta(s), **d
    )


def _alpha_rate_fd(alpha: Callable):
    w = geom.stencil_weights((-2, -1, 0, 1, 2), 1)

    def rate(theta):
        h = 1e-3 * max(1.0, 1e-3 * abs(theta))
        return sum(wk * alpha(theta + k * h) for k, wk in zip((-2, -1, 1, 2), w[[0, 1, 3, 4]])) / h

    return rate


def darboux_from_abstract(
    kappa: Callable,
    tau: Callable,
    s_range: Sequence[float],
    n: int = 256,
    alpha: Optional[Callable] = None,
    alpha_rate: Optional[Callable] = None,
    geodesic_torsion: Optional[Callable] = None,
    alpha0: float = 0.0,
    frame0=None,
    origin=(0.0, 0.0, 0.0),
    substeps: int = 8,
    label: str = "abstract",
) -> SampledCurve:
    """Synthesize a Darboux field from curvature data without a surface.

    ``kappa``, ``tau`` (and ``alpha`` or ``geodesic_torsion``) are functions
    of the contingency angle.  The angle between the surface normal and the
    binormal follows one rule:

    * ``alpha(theta)`` given: ``t_g = tau - alpha'`` with
      ``alpha' = kappa * d alpha / d theta``;
    * ``geodesic_torsion(theta)`` given: ``alpha' = tau - t_g``, starting
      from ``alpha0``;
    * neither: ``alpha`` stays at ``alpha0`` so ``t_g = tau``.

    The frame ``(T, g, n)`` and the position are integrated with RK4 and the
    frame is projected back to orthonormal after every step.  Drift above
    ``FRAME_DRIFT_BUDGET`` within one step raises :class:`FrameDriftError`.
    """
    if alpha is not None and geodesic_torsion is not None:
        raise ValueError("give either alpha or geodesic_torsion, not both")
    if alpha is not None and alpha_rate is None:
        alpha_rate = _alpha_rate_fd(alpha)
    s0, s1 = map(float, s_range)
    if not s1 > s0:
        raise DomainError("empty arc-length range")
    F0 = np.eye(3) if frame0 is None else geom.nearest_rotation(np.asarray(frame0, float))
    if alpha is not None:
        alpha0 = float(alpha(0.0))

    def invariants(theta, a_state):
        k = float(kappa(theta))
        if not k >= KAPPA_MIN:
            raise SingularCurvatureError(f"curvature {k:.3g} below {KAPPA_MIN:g} at theta={theta:.6g}", where=theta)
        tt = float(tau(theta))
        if alpha is not None:
            a = float(alpha(theta))
            a_s = k * float(alpha_rate(theta))
            tg = tt - a_s
        elif geodesic_torsion is not None:
            a = a_state
            tg = float(geodesic_torsion(theta))
            a_s = tt - tg
        else:
            a, a_s, tg = a_state, 0.0, tt
        return k, tt, a, a_s, tg

    def rhs(_s, y):
        k, _, a, a_s, tg = invariants(y[0], y[1])
        kg, kn = k * np.cos(a), k * np.sin(a)
        F = y[5:].reshape(3, 3)
        A = np.array([[0.0, kg, kn], [-kg, 0.0, tg], [-kn, -tg, 0.0]])
        out = np.empty_like(y)
        out[0] = k
        out[1] = a_s
        out[2:5] = F[0]
        out[5:] = (A @ F).ravel()
        return out

    def project(y):
        F = y[5:].reshape(3, 3)
        drift = np.max(np.abs(F @ F.T - np.eye(3)))
        if drift > FRAME_DRIFT_BUDGET:
            raise FrameDriftError(f"frame drift {drift:.3g} exceeds {FRAME_DRIFT_BUDGET:g}")
        y = y.copy()
        y[5:] = geom.nearest_rotation(F).ravel()
        return y

    y0 = np.concatenate([[0.0, alpha0], np.asarray(origin, float), F0.ravel()])
    fine = np.linspace(s0, s1, (n - 1) * substeps + 1)
    ys = geom.rk4_integrate(rhs, y0, fine, post_step=project)[::substeps]
    s = fine[::substeps]

    cols = {k: [] for k in _FIELDS}
    for si, y in zip(s, ys):
        k, tt, a, _, tg = invariants(y[0], y[1])
        T, g, nn = y[5:].reshape(3, 3)
        ca, sa = np.cos(a), np.sin(a)
        for key, val in (
            ("s", si), ("theta", y[0]), ("position", y[2:5]), ("T", T), ("g", g), ("n", nn),
            ("N", ca * g + sa * nn), ("B", -sa * g + ca * nn), ("kappa", k), ("tau", tt),
            ("k_g", k * ca), ("k_n", k * sa), ("t_g", tg), ("alpha", a),
        ):
            cols[key].append(val)
    return SampledCurve.from_arrays(orientation="abstract", label=label, **{k: np.array(v) for k, v in cols.items()})
