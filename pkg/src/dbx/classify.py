"""Classification of sampled surface curves into the special classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .frames import as_sampled

GEODESIC = "geodesic"
ASYMPTOTIC = "asymptotic"
PRINCIPAL = "principal"
HELIX = "helix"
PLANAR = "planar"
FLAGS = (GEODESIC, ASYMPTOTIC, PRINCIPAL, HELIX, PLANAR)

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class CurveClass:
    """Flags with the residual that decided each of them.

    Residuals are dimensionless: curvature-like quantities are multiplied by
    the curve length, and the helix residual is the spread of ``tau/kappa``.
    ``epsilon`` is ``sign(k_g)`` along an asymptotic line and ``sigma`` is
    ``sign(k_n)`` along a geodesic; both are ``None`` when not applicable.
    """

    flags: frozenset
    residuals: dict
    tolerances: dict
    phi: float
    epsilon: Optional[int] = None
    sigma: Optional[int] = None
    length: float = field(default=0.0)

    def __contains__(self, flag):
        return flag in self.flags

    def to_dict(self):
        out = {name: name in self.flags for name in FLAGS}
        out["residuals"] = {k: float(v) for k, v in self.residuals.items()}
        out["tolerances"] = {k: float(v) for k, v in self.tolerances.items()}
        out["phi_mean"] = float(self.phi)
        out["epsilon"] = self.epsilon
        out["sigma"] = self.sigma
        out["length"] = float(self.length)
        return out


def _constant_sign(x, floor):
    sg = np.sign(np.where(np.abs(x) > floor, x, 0.0))
    if np.all(sg == 1):
        return 1
    if np.all(sg == -1):
        return -1
    return None


def classify_curve(samples, tol: float = DEFAULT_TOL) -> CurveClass:
    samples = as_sampled(samples)
    if len(samples) < 8:
        raise ValueError("classification needs at least 8 samples")
    L = samples.length
    kappa, tau = samples.kappa, samples.tau
    ratio = tau / kappa
    mean = float(np.mean(ratio))
    residuals = {
        GEODESIC: np.max(np.abs(samples.k_g)) * L,
        ASYMPTOTIC: np.max(np.abs(samples.k_n)) * L,
        PRINCIPAL: np.max(np.abs(samples.t_g)) * L,
        HELIX: np.max(np.abs(ratio - mean)),
        PLANAR: np.max(np.abs(tau)) * L,
    }
    tolerances = {k: tol for k in residuals}
    tolerances[HELIX] = tol * abs(mean) + tol
    flags = frozenset(k for k in FLAGS if residuals[k] < tolerances[k])
    cos_a, sin_a = np.cos(samples.alpha), np.sin(samples.alpha)
    epsilon = _constant_sign(cos_a, 0.5) if ASYMPTOTIC in flags else None
    sigma = _constant_sign(sin_a, 0.5) if GEODESIC in flags else None
    return CurveClass(flags, residuals, tolerances, mean, epsilon, sigma, L)
