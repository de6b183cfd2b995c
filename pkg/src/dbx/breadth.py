"""
Constant-breadth partner curves
===============================

A partner curve is written in the Darboux frame of the base curve,

    beta*(s) = beta(s) + m1 T + m2 g + m3 n,

and the coefficients are functions of the contingency angle ``theta``
(``d theta / ds = kappa``).  With ``rho = 1/kappa`` and
``f(theta) = rho + rho*`` they obey

    m1' = rho (m2 k_g + m3 k_n) - f
    m2' = rho (m3 t_g - m1 k_g)
    m3' = rho (-m1 k_n - m2 t_g)

(``'`` = d/d theta).  The three special cases fix ``(rho k_g, rho k_n,
rho t_g)``:

* geodesic:   ``(0, sigma, phi)`` with ``phi = tau/kappa`` and
  ``sigma = sign(k_n)``;
* asymptotic: ``(eps, 0, phi)`` with ``eps = sign(k_g)``;
* principal:  ``(cos alpha, sin alpha, 0)``.

Closed-form solutions for helices and direct RK4 integration are both
provided so each can serve as the other's oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from . import geom
from .errors import (
    CaseInapplicableError,
    DegenerateParameterError,
    InconsistentInitialDataError,
    ThetaRangeError,
)
from .frames import SampledCurve, as_sampled

DEFAULT_STEPS = 4096


class CaseKind(str, enum.Enum):
    GEODESIC = "geodesic"
    ASYMPTOTIC = "asymptotic"
    PRINCIPAL = "principal"
    GENERAL = "general"


class Provenance(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    INTEGRATED = "integrated"


@dataclass(frozen=True)
class BreadthCase:
    """Which coefficient system applies.

    ``epsilon`` is the sign of ``k_g`` on an asymptotic line; ``sigma`` is
    the sign of ``k_n`` on a geodesic.  The textbook form of the geodesic
    system assumes ``sigma = +1``; an outward-normal cylinder gives -1.
    """

    kind: CaseKind
    epsilon: int = 1
    sigma: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", CaseKind(self.kind))
        if self.epsilon not in (1, -1) or self.sigma not in (1, -1):
            raise ValueError("epsilon and sigma must be +1 or -1")

    @classmethod
    def geodesic(cls, sigma: int = 1):
        return cls(CaseKind.GEODESIC, sigma=sigma)

    @classmethod
    def asymptotic(cls, epsilon: int = 1):
        return cls(CaseKind.ASYMPTOTIC, epsilon=epsilon)

    @classmethod
    def principal(cls):
        return cls(CaseKind.PRINCIPAL)

    @classmethod
    def general(cls):
        return cls(CaseKind.GENERAL)

    def to_dict(self):
        d = {"kind": self.kind.value}
        if self.kind is CaseKind.ASYMPTOTIC:
            d["epsilon"] = self.epsilon
        if self.kind is CaseKind.GEODESIC:
            d["sigma"] = self.sigma
        return d


def as_function(x) -> Callable:
    """Wrap a constant as a broadcasting function of theta."""
    if callable(x):
        return x
    c = float(x)
    return lambda theta: c + 0.0 * np.asarray(theta, dtype=float)


def reduced_invariants(case: BreadthCase, theta, data):
    """``(rho k_g, rho k_n, rho t_g)`` at ``theta`` for ``case``."""
    theta = np.asarray(theta, dtype=float)
    zero = 0.0 * theta
    if case.kind is CaseKind.GENERAL:
        a, b, c = data(theta)
        return a + zero, b + zero, c + zero
    value = as_function(data)(theta) + zero
    if case.kind is CaseKind.GEODESIC:
        return zero, case.sigma + zero, value
    if case.kind is CaseKind.ASYMPTOTIC:
        return case.epsilon + zero, zero, value
    return np.cos(value), np.sin(value), zero


def system_rhs(case: BreadthCase, m, theta, data, f=0.0) -> np.ndarray:
    """Right-hand side ``dm/d theta`` of the coefficient system.

    ``data`` is ``phi(theta)`` for the geodesic and asymptotic cases,
    ``alpha(theta)`` for the principal case and a function returning the
    triple ``(rho k_g, rho k_n, rho t_g)`` for the general case.  Constants
    are accepted wherever a function is.  ``m`` may be ``(3,)`` or ``(3, N)``
    with ``theta`` of shape ``(N,)``.
    """
    m1, m2, m3 = np.asarray(m, dtype=float)
    a, b, c = reduced_invariants(case, theta, data)
    # sampled f values on the same grid are accepted as-is
    fv = np.asarray(f, dtype=float) if np.ndim(f) > 0 else as_function(f)(theta)
    return np.array([a * m2 + b * m3 - fv, c * m3 - a * m1, -b * m1 - c * m2])


@dataclass(frozen=True)
class CoefficientTrajectory:
    """Coefficients ``m1, m2, m3`` and ``f`` sampled on an increasing theta grid.

    ``dm`` holds ``dm/d theta`` (analytic for closed forms, the system
    right-hand side for integrated ones) and drives Hermite interpolation.
    """

    theta: np.ndarray
    m: np.ndarray
    f: np.ndarray
    case: BreadthCase
    provenance: Provenance
    dm: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        m = np.asarray(self.m, dtype=float)
        f = np.asarray(self.f, dtype=float) * np.ones_like(theta)
        if m.shape != (3, len(theta)):
            raise ValueError("m must have shape (3, len(theta))")
        if len(theta) > 1 and np.any(np.diff(theta) <= 0):
            raise ValueError("theta grid must be strictly increasing")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "f", f)
        if self.dm is not None:
            object.__setattr__(self, "dm", np.asarray(self.dm, dtype=float))

    m1 = property(lambda self: self.m[0])
    m2 = property(lambda self: self.m[1])
    m3 = property(lambda self: self.m[2])

    @property
    def breadth(self) -> np.ndarray:
        return np.sqrt(np.sum(self.m**2, axis=0))

    @property
    def drift(self) -> float:
        """Largest relative change of ``m1^2 + m2^2 + m3^2`` along the grid."""
        q = np.sum(self.m**2, axis=0)
        return float(np.max(np.abs(q - q[0])) / max(q[0], np.finfo(float).tiny))

    def at(self, theta) -> "CoefficientTrajectory":
        """Resample at ``theta`` (must lie inside the grid)."""
        theta = np.asarray(theta, dtype=float)
        lo, hi = self.theta[0], self.theta[-1]
        slack = 1e-10 * max(1.0, abs(lo), abs(hi))
        if theta.min() < lo - slack or theta.max() > hi + slack:
            raise ThetaRangeError(f"theta range [{theta.min():.6g}, {theta.max():.6g}] not covered by [{lo:.6g}, {hi:.6g}]")
        if len(theta) == len(self.theta) and np.allclose(theta, self.theta, rtol=0, atol=slack):
            return self
        theta = np.clip(theta, lo, hi)
        if self.dm is not None:
            m = np.array([CubicHermiteSpline(self.theta, self.m[i], self.dm[i])(theta) for i in range(3)])
            dm = np.array([CubicHermiteSpline(self.theta, self.m[i], self.dm[i])(theta, 1) for i in range(3)])
        else:
            splines = [CubicSpline(self.theta, self.m[i]) for i in range(3)]
            m = np.array([sp(theta) for sp in splines])
            dm = np.array([sp(theta, 1) for sp in splines])
        f = CubicSpline(self.theta, self.f)(theta)
        return CoefficientTrajectory(theta, m, f, self.case, self.provenance, dm, self.label)


def _theta_grid(theta_range, step):
    t0, t1 = map(float, theta_range)
    span = t1 - t0
    if not span > 0:
        raise ValueError("empty theta range")
    step = span / DEFAULT_STEPS if step is None else float(step)
    if step <= 0 or step > span / 64 * (1 + 1e-12):
        raise ValueError("step must be positive and at most (theta_max - theta_min)/64")
    n = int(np.ceil(span / step - 1e-9))
    return np.linspace(t0, t1, n + 1)


def integrate_system(case: BreadthCase, m0, theta_range, step: Optional[float] = None, data=1.0, f=0.0,
                     label: str = "integrated") -> CoefficientTrajectory:
    """Fixed-step RK4 solution of the coefficient system from ``m0``.

    The default step is ``(theta_max - theta_min)/4096``.  The returned
    trajectory's ``drift`` is the conservation diagnostic; it is only
    expected to vanish when ``m1 f`` does.
    """
    grid = _theta_grid(theta_range, step)
    f_fn = as_function(f)
    m = geom.rk4_integrate(lambda th, y: system_rhs(case, y, th, data, f_fn), np.asarray(m0, float), grid).T
    dm = system_rhs(case, m, grid, data, f_fn)
    return CoefficientTrajectory(grid, m, f_fn(grid), case, Provenance.INTEGRATED, dm, label)


def _harmonic(c0, c1, c2, omega, nu, theta):
    """``m1 = c0 + (c1 sin(nu th) - c2 cos(nu th))/omega`` and derivatives 1..3."""
    s, c = np.sin(nu * theta), np.cos(nu * theta)
    p = c1 * s - c2 * c
    q = c1 * c + c2 * s
    return (c0 + p / omega, nu * q / omega, -(nu**2) * p / omega, -(nu**3) * q / omega)


def _harmonic_f(c1, c2, phi0):
    def f(theta):
        return c1 * np.cos(phi0 * theta) + c2 * np.sin(phi0 * theta)

    return f


def _require_nonzero(name, value):
    if value == 0:
        raise DegenerateParameterError(f"{name} must be nonzero")


@dataclass(frozen=True)
class ClosedForm:
    """A closed-form coefficient family; call with a theta grid."""

    name: str
    case: BreadthCase
    data: object
    evaluate: Callable = field(repr=False)
    params: dict = field(default_factory=dict)
    f: Optional[Callable] = field(default=None, repr=False)

    def trajectory(self, theta) -> CoefficientTrajectory:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        m, dm, f = self.evaluate(theta)
        return CoefficientTrajectory(theta, m, f, self.case, Provenance.CLOSED_FORM, dm, self.name)

    __call__ = trajectory

    def initial(self, theta0: float = 0.0) -> np.ndarray:
        return self.trajectory(np.array([theta0])).m[:, 0]

    def f_function(self) -> Callable:
        if self.f is not None:
            return self.f

        def f(theta):
            theta = np.asarray(theta, dtype=float)
            return np.reshape(self.evaluate(np.atleast_1d(theta))[2], theta.shape)

        return f


def _frequency(phi0, paper_frequency):
    omega = np.sqrt(1.0 + phi0 * phi0)
    # the uncorrected variant oscillates at 1 + phi0^2 instead of its square root
    return omega, (omega * omega if paper_frequency else omega)


def geodesic_closed_form_i(c1: float, c2: float, phi0: float, sigma: int = 1, c0: float = 0.0,
                           paper_frequency: bool = False) -> ClosedForm:
    """Geodesic helix, ``f = 0``: ``m1`` harmonic, ``m2 = -(m1 + m1'')/phi0``, ``m3 = m1'``.

    ``c0`` adds the constant homogeneous solution ``m1 = c0``,
    ``m2 = -c0/phi0``.  ``paper_frequency`` reproduces the uncorrected
    frequency 1 + phi0^2 for regression purposes.
    """
    _require_nonzero("phi0", phi0)
    omega, nu = _frequency(phi0, paper_frequency)

    def evaluate(theta):
        a0, a1, a2, a3 = _harmonic(c0, c1, c2, omega, nu, theta)
        m = np.array([a0, -sigma * (a0 + a2) / phi0, sigma * a1])
        dm = np.array([a1, -sigma * (a1 + a3) / phi0, sigma * a2])
        return m, dm, 0.0 * theta

    return ClosedForm("geodesic_i", BreadthCase.geodesic(sigma), phi0, evaluate,
                      dict(c0=c0, c1=c1, c2=c2, phi0=phi0, paper_frequency=paper_frequency), as_function(0.0))


def geodesic_closed_form_ii(c1: float, c2: float, phi0: float, sigma: int = 1) -> ClosedForm:
    """Geodesic helix, ``m1 = 0``: ``f = c1 cos(phi0 th) + c2 sin(phi0 th)``, ``m3 = f``, ``m2 = -m3'/phi0``."""
    _require_nonzero("phi0", phi0)

    def evaluate(theta):
        f = c1 * np.cos(phi0 * theta) + c2 * np.sin(phi0 * theta)
        fd = phi0 * (c2 * np.cos(phi0 * theta) - c1 * np.sin(phi0 * theta))
        zero = 0.0 * theta
        m = np.array([zero, -sigma * fd / phi0, sigma * f])
        dm = np.array([zero, sigma * phi0 * f, sigma * fd])
        return m, dm, f

    return ClosedForm("geodesic_ii", BreadthCase.geodesic(sigma), phi0, evaluate, dict(c1=c1, c2=c2, phi0=phi0),
                      _harmonic_f(c1, c2, phi0))


def asymptotic_closed_form_i(c1: float, c2: float, phi0: float, epsilon: int = 1, c0: float = 0.0,
                             paper_frequency: bool = False) -> ClosedForm:
    """Asymptotic helix, ``f = 0``: ``m2 = eps m1'``, ``m3 = eps (m1 + m1'')/phi0``."""
    _require_nonzero("phi0", phi0)
    omega, nu = _frequency(phi0, paper_frequency)

    def evaluate(theta):
        a0, a1, a2, a3 = _harmonic(c0, c1, c2, omega, nu, theta)
        m = np.array([a0, epsilon * a1, epsilon * (a0 + a2) / phi0])
        dm = np.array([a1, epsilon * a2, epsilon * (a1 + a3) / phi0])
        return m, dm, 0.0 * theta

    return ClosedForm("asymptotic_i", BreadthCase.asymptotic(epsilon), phi0, evaluate,
                      dict(c0=c0, c1=c1, c2=c2, phi0=phi0, paper_frequency=paper_frequency), as_function(0.0))


def asymptotic_closed_form_ii(c1: float, c2: float, phi0: float, epsilon: int = 1) -> ClosedForm:
    """Asymptotic helix, ``m1 = 0``: ``m2 = eps f``, ``m3 = m2'/phi0``."""
    _require_nonzero("phi0", phi0)

    def evaluate(theta):
        f = c1 * np.cos(phi0 * theta) + c2 * np.sin(phi0 * theta)
        fd = phi0 * (c2 * np.cos(phi0 * theta) - c1 * np.sin(phi0 * theta))
        zero = 0.0 * theta
        m = np.array([zero, epsilon * f, epsilon * fd / phi0])
        dm = np.array([zero, epsilon * fd, -epsilon * phi0 * f])
        return m, dm, f

    return ClosedForm("asymptotic_ii", BreadthCase.asymptotic(epsilon), phi0, evaluate,
                      dict(c1=c1, c2=c2, phi0=phi0), _harmonic_f(c1, c2, phi0))


def _rate(fn, theta, order):
    w = geom.stencil_weights((-2, -1, 0, 1, 2), order)
    h = 2e-3 * np.maximum(1.0, 1e-3 * np.abs(theta))
    return sum(wk * fn(theta + k * h) for k, wk in zip((-2, -1, 0, 1, 2), w)) / h**order


def principal_initial_data(c1: float, c2: float, alpha0: float, alpha_rate: float, c0: float = 0.0,
                           paper_frequency: bool = False):
    """``(m2(0), m3(0))`` compatible with the harmonic ``m1`` of a principal helix.

    With ``P = m2 cos a + m3 sin a`` and ``Q = -m2 sin a + m3 cos a`` the
    system forces ``P = m1'`` and ``alpha' Q = m1 + m1''`` at every theta.
    """
    _require_nonzero("alpha_rate", alpha_rate)
    omega, nu = _frequency(alpha_rate, paper_frequency)
    a0, a1, a2, _ = _harmonic(c0, c1, c2, omega, nu, 0.0)
    P, Q = a1, (a0 + a2) / alpha_rate
    ca, sa = np.cos(alpha0), np.sin(alpha0)
    return float(P * ca - Q * sa), float(P * sa + Q * ca)


def principal_closed_form_helix(c1: float, c2: float, alpha: Callable, m2_0: Optional[float] = None,
                                m3_0: Optional[float] = None, c0: float = 0.0, paper_frequency: bool = False,
                                tol: float = 1e-9) -> ClosedForm:
    """Principal helix with ``m1`` harmonic at frequency ``sqrt(1 + alpha'^2)``.

    ``m2`` and ``m3`` come from integrating ``m2' = -m1 cos(alpha)`` and
    ``m3' = -m1 sin(alpha)`` from ``(m2_0, m3_0)`` at ``theta = 0``.  Missing
    initial values are filled in by :func:`principal_initial_data`.  Given
    values must satisfy both the first row of the system and its
    derivative at ``theta = 0``; otherwise the first row fails away from the
    start and :class:`InconsistentInitialDataError` is raised.
    """
    alpha = as_function(alpha)
    alpha0 = float(alpha(0.0))
    a_rate = float(_rate(alpha, 0.0, 1))
    if abs(a_rate) < 1e-12:
        raise DegenerateParameterError("alpha must have a nonzero constant rate")
    omega, nu = _frequency(a_rate, paper_frequency)
    a0, a1, a2, _ = _harmonic(c0, c1, c2, omega, nu, 0.0)
    if m2_0 is None or m3_0 is None:
        m2_0, m3_0 = principal_initial_data(c1, c2, alpha0, a_rate, c0, paper_frequency)
    ca, sa = np.cos(alpha0), np.sin(alpha0)
    scale = 1.0 + abs(c0) + abs(c1) + abs(c2) + abs(m2_0) + abs(m3_0)
    row1 = m2_0 * ca + m3_0 * sa - a1
    row1_rate = a_rate * (-m2_0 * sa + m3_0 * ca) - (a0 + a2)
    if abs(row1) > tol * scale or abs(row1_rate) > tol * scale:
        raise InconsistentInitialDataError(
            f"initial (m2, m3) = ({m2_0:.6g}, {m3_0:.6g}) violates the first row "
            f"(residual {row1:.3g}, derivative residual {row1_rate:.3g})"
        )

    def evaluate(theta):
        lin = alpha0 + a_rate * theta
        if np.max(np.abs(alpha(theta) - lin)) > 1e-8 * (1.0 + np.max(np.abs(lin))):
            raise CaseInapplicableError("alpha is not linear in theta: the curve is not a helix")
        m1 = lambda th: _harmonic(c0, c1, c2, omega, nu, th)[0]
        start = 0.0
        nodes = np.concatenate([[start], theta]) if theta[0] != start else theta
        i2 = np.cumsum(np.concatenate([[0.0], geom.panel_integrals(lambda th: m1(th) * np.cos(alpha(th)), nodes)]))
        i3 = np.cumsum(np.concatenate([[0.0], geom.panel_integrals(lambda th: m1(th) * np.sin(alpha(th)), nodes)]))
        if theta[0] != start:
            i2, i3 = i2[1:], i3[1:]
        b0, b1, _, _ = _harmonic(c0, c1, c2, omega, nu, theta)
        al = alpha(theta)
        m = np.array([b0, m2_0 - i2, m3_0 - i3])
        dm = np.array([b1, -b0 * np.cos(al), -b0 * np.sin(al)])
        return m, dm, 0.0 * theta

    return ClosedForm("principal_helix", BreadthCase.principal(), alpha, evaluate,
                      dict(c0=c0, c1=c1, c2=c2, alpha_rate=a_rate, m2_0=m2_0, m3_0=m3_0,
                           paper_frequency=paper_frequency), as_function(0.0))


def principal_closed_form_planar_or_helix(c2: float, c3: float, alpha: Callable, tol: float = 1e-8,
                                          strict: bool = True) -> ClosedForm:
    """Principal line with ``m1 = 0``: ``m2 = c2``, ``m3 = c3``, ``f = c2 cos(alpha) + c3 sin(alpha)``.

    When ``strict``, ``alpha'' (-c2 sin(alpha) + c3 cos(alpha))`` must vanish on
    the evaluation grid (within ``tol``), i.e. the base curve is a helix or
    ``alpha`` is constant.
    """
    alpha = as_function(alpha)

    def evaluate(theta):
        al = alpha(theta) + 0.0 * theta
        if strict:
            cond = _rate(alpha, theta, 2) * (-c2 * np.sin(al) + c3 * np.cos(al))
            worst = float(np.max(np.abs(cond)))
            if worst > tol * (1.0 + abs(c2) + abs(c3)):
                raise CaseInapplicableError(
                    f"alpha'' (-c2 sin alpha + c3 cos alpha) reaches {worst:.3g}: neither helix nor planar"
                )
        zero = 0.0 * theta
        m = np.array([zero, c2 + zero, c3 + zero])
        return m, np.zeros_like(m), c2 * np.cos(al) + c3 * np.sin(al)

    def f(theta):
        al = alpha(theta)
        return c2 * np.cos(al) + c3 * np.sin(al)

    return ClosedForm("principal_constant", BreadthCase.principal(), alpha, evaluate, dict(c2=c2, c3=c3), f)


@dataclass(frozen=True)
class BreadthPair:
    """Base curve, partner curve and the coefficients that relate them."""

    beta: SampledCurve
    beta_star: np.ndarray
    coefficients: CoefficientTrajectory
    ds_star_ds: np.ndarray
    s_star: np.ndarray

    @property
    def tangent_factor(self) -> np.ndarray:
        """``1 + m1_s - m3 k_n - m2 k_g``, the T-component of ``d beta*/ds``."""
        return -self.ds_star_ds

    @property
    def offsets(self) -> np.ndarray:
        return self.beta_star - self.beta.position


def construct_partner(samples, coeffs: CoefficientTrajectory) -> BreadthPair:
    """Evaluate ``beta + m1 T + m2 g + m3 n`` at every sample.

    Coefficients are looked up at each sample's contingency angle.  The
    ``ds*/ds`` column is ``-(1 + kappa m1' - m3 k_n - m2 k_g)``.
    """
    samples = as_sampled(samples)
    c = coeffs.at(samples.theta)
    m1, m2, m3 = c.m
    beta_star = samples.position + m1[:, None] * samples.T + m2[:, None] * samples.g + m3[:, None] * samples.n
    if c.dm is not None:
        dm1 = c.dm[0]
    else:
        dm1 = np.gradient(m1, samples.theta, edge_order=2)
    factor = 1.0 + samples.kappa * dm1 - m3 * samples.k_n - m2 * samples.k_g
    ds = -factor
    s_star = cumulative_trapezoid(np.abs(ds), samples.s, initial=0.0)
    return BreadthPair(samples, beta_star, c, ds, s_star)


def case_data(samples, case: BreadthCase):
    """The ``data`` argument of :func:`system_rhs` measured from sampled frames."""
    samples = as_sampled(samples)
    theta = samples.theta
    rho = 1.0 / samples.kappa
    if case.kind in (CaseKind.GEODESIC, CaseKind.ASYMPTOTIC):
        return CubicSpline(theta, samples.tau * rho)
    if case.kind is CaseKind.PRINCIPAL:
        return CubicSpline(theta, samples.alpha)
    splines = [CubicSpline(theta, rho * samples.k_g), CubicSpline(theta, rho * samples.k_n), CubicSpline(theta, rho * samples.t_g)]
    return lambda th: tuple(sp(th) for sp in splines)
