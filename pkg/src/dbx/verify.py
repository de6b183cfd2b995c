"""
Verification checks
===================

Each check returns a :class:`CheckResult` with the worst residual, the
tolerance it was held to and where along the curve (``s``) or the
coefficient grid (``theta``) the worst violation occurred.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geom
from .breadth import BreadthPair, CoefficientTrajectory, system_rhs
from .frames import as_sampled
from .geom import dot, norm

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    status: str
    locus: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self):
        return {
            "name": self.name,
            "max_residual": _clean(self.max_residual),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
            "status": self.status,
            "locus": {k: _clean(v) for k, v in self.locus.items()},
            "details": {k: _clean(v) for k, v in self.details.items()},
        }


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    return v


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary_lines(self):
        return [
            f"{'PASS' if c.passed else c.status.upper():12s} {c.name}: residual {c.max_residual:.3e} (tol {c.tolerance:.1e})"
            for c in self.checks
        ]

    def to_dict(self):
        return {"overall_pass": self.overall_pass, "checks": [c.to_dict() for c in self.checks]}


def _status(ok):
    return PASS if ok else FAIL


def check_breadth_constancy(pair: BreadthPair, tol: float = 1e-9) -> CheckResult:
    """Distance ``|beta* - beta|`` stays at its median value."""
    d = norm(pair.offsets)
    if len(d) < 32:
        raise ValueError("breadth check needs at least 32 samples")
    med = float(np.median(d))
    dev = np.abs(d - med)
    i = int(np.argmax(dev))
    return CheckResult(
        "breadth_constancy", float(dev[i]), tol, _status(dev[i] < tol * (1.0 + med)),
        {"s": pair.beta.s[i]}, {"median_breadth": med},
    )


def _s_derivative(values, s):
    s = np.asarray(s, dtype=float)
    try:
        h = geom.uniform_spacing(s)
    except ValueError:
        return np.gradient(values, s, axis=0, edge_order=2)
    return geom.grid_derivative(values, h)


def check_tangent_opposition(pair: BreadthPair, tol: float = 1e-4) -> CheckResult:
    """``d beta*/ds`` is collinear with ``T`` at interior samples.

    The residual is the angle between the line spanned by ``d beta*/ds`` and
    ``T``.  The per-sample sign of ``<d beta*/ds, T>`` is reported and must
    agree with the sign of ``1 + m1_s - m3 k_n - m2 k_g`` wherever that factor
    is clearly nonzero; ``T* = -T`` then holds with ``ds*/ds`` of the
    opposite sign.  An identity pair (zero breadth) or a vanishing
    derivative is inconclusive.
    """
    T = pair.beta.T
    d = _s_derivative(pair.beta_star, pair.beta.s)
    inner = slice(2, len(T) - 2)
    d, T_in = d[inner], T[inner]
    s_in = pair.beta.s[inner]
    mag = norm(d)
    degenerate = mag < 1e-12
    along = dot(d, T_in)
    across = norm(np.cross(d, T_in))
    angle = np.where(degenerate, 0.0, np.arctan2(across, np.abs(along)))
    signs = np.where(degenerate, 0, np.sign(along)).astype(int)
    factor = pair.tangent_factor[inner]
    clear = np.abs(factor) > 10 * tol
    mismatches = int(np.sum(clear & ~degenerate & (signs != np.sign(factor))))
    i = int(np.argmax(angle))
    identity = float(np.median(norm(pair.offsets))) < 1e-12
    if identity or np.any(degenerate):
        status = INCONCLUSIVE
    else:
        status = _status(angle[i] < tol and mismatches == 0)
    return CheckResult(
        "tangent_opposition", float(angle[i]), tol, status, {"s": s_in[i]},
        {
            "sign_mismatches": mismatches,
            "negative_samples": int(np.sum(signs < 0)),
            "positive_samples": int(np.sum(signs > 0)),
            "degenerate_samples": int(np.sum(degenerate)),
            "identity_pair": identity,
        },
    )


def tangent_signs(pair: BreadthPair) -> np.ndarray:
    """Sign of ``<d beta*/ds, T>`` at every sample (finite differences)."""
    return np.sign(dot(_s_derivative(pair.beta_star, pair.beta.s), pair.beta.T)).astype(int)


def check_ode_residual(coeffs: CoefficientTrajectory, case=None, data=1.0, f=None, tol: float = 1e-6) -> CheckResult:
    """Finite-difference ``dm/d theta`` against the system right-hand side.

    ``f`` defaults to the trajectory's own ``f`` column and ``case`` to its
    case tag.
    """
    theta = coeffs.theta
    if len(theta) < 64:
        raise ValueError("ODE residual check needs at least 64 grid points")
    case = coeffs.case if case is None else case
    h = geom.uniform_spacing(theta)
    fd = geom.grid_derivative(coeffs.m, h, axis=1)
    rhs = system_rhs(case, coeffs.m, theta, data, coeffs.f if f is None else f)
    err = np.max(np.abs(fd - rhs), axis=0)
    i = int(np.argmax(err))
    return CheckResult("ode_residual", float(err[i]), tol, _status(err[i] < tol), {"theta": theta[i]},
                       {"case": case.kind.value})


def check_m1f_constraint(coeffs: CoefficientTrajectory, tol: float = 1e-12) -> CheckResult:
    """The product ``m1 f`` vanishes (needed for constant breadth)."""
    prod = np.abs(coeffs.m1 * coeffs.f)
    i = int(np.argmax(prod))
    bound = tol * (1.0 + np.max(np.abs(coeffs.m1))) * (1.0 + np.max(np.abs(coeffs.f)))
    return CheckResult("m1f_constraint", float(prod[i]), tol, _status(prod[i] < bound),
                       {"theta": coeffs.theta[i]}, {"scaled_bound": bound})


def frame_residuals(samples) -> dict:
    """Per-sample residual arrays of the frame identities."""
    sc = as_sampled(samples)
    T, g, n, N, B = sc.T, sc.g, sc.n, sc.N, sc.B
    kappa, tau, kg, kn, tg, alpha = sc.kappa, sc.tau, sc.k_g, sc.k_n, sc.t_g, sc.alpha
    frame = np.stack([T, g, n], axis=1)
    gram = np.einsum("kij,klj->kil", frame, frame) - np.eye(3)
    ca, sa = np.cos(alpha)[:, None], np.sin(alpha)[:, None]
    return {
        "curvature_split": np.abs(kg**2 + kn**2 - kappa**2) / kappa**2,
        "geodesic_torsion": np.abs(tg - (tau - _s_derivative(alpha, sc.s))),
        "orthonormality": np.maximum(np.max(np.abs(gram), axis=(1, 2)), norm(g - np.cross(n, T))),
        "rotation": np.maximum(norm(g - (ca * N - sa * B)), norm(n - (sa * N + ca * B))),
        "angle": np.abs(kg - kappa * np.cos(alpha)) + np.abs(kn - kappa * np.sin(alpha)),
    }


def check_frame_identities(samples, tol: float = 1e-6) -> CheckResult:
    """Curvature split, ``t_g = tau - alpha'``, orthonormality and frame rotation."""
    sc = as_sampled(samples)
    if len(sc) < 8:
        raise ValueError("frame identity check needs at least 8 samples")
    res = frame_residuals(sc)
    worst = {k: float(np.max(v)) for k, v in res.items()}
    key = max(worst, key=worst.get)
    i = int(np.argmax(res[key]))
    return CheckResult("frame_identities", worst[key], tol, _status(worst[key] < tol),
                       {"s": sc.s[i], "component": key}, worst)


def check_f_consistency(pair: BreadthPair, tol: float = 1e-4) -> CheckResult:
    """``rho + rho*`` from the two curves' curvatures reproduces ``f``.

    ``rho*`` is signed by ``ds*/ds`` and taken from finite-difference
    curvature of the sampled partner, so interior samples only.
    """
    s = pair.beta.s
    d1 = _s_derivative(pair.beta_star, s)
    d2 = _s_derivative(d1, s)
    inner = slice(3, len(s) - 3)
    d1, d2 = d1[inner], d2[inner]
    speed = norm(d1)
    kappa_star = norm(np.cross(d1, d2)) / speed**3
    rho = 1.0 / pair.beta.kappa[inner]
    rho_star = np.sign(pair.ds_star_ds[inner]) / kappa_star
    err = np.abs(rho + rho_star - pair.coefficients.f[inner])
    i = int(np.argmax(err))
    return CheckResult("f_consistency", float(err[i]), tol, _status(err[i] < tol), {"s": s[inner][i]})


def verify_pair(pair: BreadthPair, case=None, data=1.0, tolerances: Optional[dict] = None,
                coefficient_grid: Optional[CoefficientTrajectory] = None) -> VerificationReport:
    """Run every pair-level check with default or overridden tolerances."""
    tol = {"breadth_constancy": 1e-9, "tangent_opposition": 1e-4, "ode_residual": 1e-6,
           "m1f_constraint": 1e-12, "frame_identities": 1e-6}
    tol.update(tolerances or {})
    grid = coefficient_grid if coefficient_grid is not None else pair.coefficients
    checks = [
        check_frame_identities(pair.beta, tol["frame_identities"]),
        check_breadth_constancy(pair, tol["breadth_constancy"]),
        check_tangent_opposition(pair, tol["tangent_opposition"]),
        check_ode_residual(grid, case, data, tol=tol["ode_residual"]),
        check_m1f_constraint(grid, tol["m1f_constraint"]),
    ]
    return VerificationReport(tuple(checks))
