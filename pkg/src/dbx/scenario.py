"""
Scenario files
==============

One scenario per TOML file.  A curve comes either from the catalog::

    name = "helix-geodesic"
    surface = "cylinder(1)"
    curve = "helix(1, 1)"
    t_range = [0.0, 6.283185307179586]
    samples = 512

or from abstract curvature data (functions of ``theta``)::

    [abstract]
    kappa = "0.5"
    tau = "0.5"
    alpha = "theta"          # or geodesic_torsion = "...", or alpha0 = 1.57
    s_range = [0.0, 12.566370614359172]

Partner construction lives in ``[breadth]`` (``method``, ``c0``..``c3``,
``phi0``, ``epsilon``, ``sigma``, ``m0``, ``f``, ``steps``, ``m2_0``,
``m3_0``) and per-check tolerances in ``[tolerances]``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import breadth as bd
from .catalog import curve_on_surface
from .classify import (ASYMPTOTIC, DEFAULT_TOL, GEODESIC, HELIX, PRINCIPAL, CurveClass,
                       classify_curve)
from .errors import CaseInapplicableError, DbxError, ScenarioError
from .expr import compile_expression
from .frames import SampledCurve, darboux_from_abstract, sample_curve
from .verify import VerificationReport, check_frame_identities, verify_pair

METHODS = {
    "geodesic_i": (bd.CaseKind.GEODESIC, {GEODESIC, HELIX}),
    "geodesic_ii": (bd.CaseKind.GEODESIC, {GEODESIC, HELIX}),
    "asymptotic_i": (bd.CaseKind.ASYMPTOTIC, {ASYMPTOTIC, HELIX}),
    "asymptotic_ii": (bd.CaseKind.ASYMPTOTIC, {ASYMPTOTIC, HELIX}),
    "principal_helix": (bd.CaseKind.PRINCIPAL, {PRINCIPAL, HELIX}),
    "principal_constant": (bd.CaseKind.PRINCIPAL, {PRINCIPAL}),
    "integrate": (None, set()),
}
_CASE_FLAGS = {"geodesic": {GEODESIC}, "asymptotic": {ASYMPTOTIC}, "principal": {PRINCIPAL}, "general": set()}
TOLERANCE_KEYS = ("breadth_constancy", "tangent_opposition", "ode_residual", "m1f_constraint", "frame_identities")
_TOP_KEYS = {"name", "surface", "curve", "t_range", "samples", "tol", "abstract", "breadth", "tolerances", "output_dir"}


@dataclass(frozen=True)
class Scenario:
    name: str
    samples: int
    tol: Optional[float]
    surface: Optional[str] = None
    curve: Optional[str] = None
    t_range: tuple = (0.0, 2 * np.pi)
    abstract: Optional[dict] = None
    breadth: Optional[dict] = None
    tolerances: dict = field(default_factory=dict)
    output_dir: Optional[str] = None

    def default_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        env = os.environ.get("DBX_TOL")
        if env:
            try:
                value = float(env)
            except ValueError:
                raise ScenarioError("DBX_TOL", f"not a number: {env!r}") from None
            if not value > 0:
                raise ScenarioError("DBX_TOL", "must be positive")
            return value
        return DEFAULT_TOL


def _positive(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ScenarioError(path, f"must be a positive number, got {value!r}")
    return float(value)


def _pair(value, path):
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value)):
        raise ScenarioError(path, "must be a list of two numbers")
    lo, hi = map(float, value)
    if not hi > lo:
        raise ScenarioError(path, "upper bound must exceed lower bound")
    return lo, hi


def _expr(value, path):
    try:
        return compile_expression(value)
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def parse_scenario(data: dict) -> Scenario:
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ScenarioError(unknown[0], "unknown key")
    name = data.get("name")
    if not isinstance(name, str) or not name.strip():
        raise ScenarioError("name", "missing or empty")
    samples = data.get("samples", 256)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 64:
        raise ScenarioError("samples", "must be an integer >= 64")
    tol = data.get("tol")
    tol = None if tol is None else _positive(tol, "tol")

    abstract = data.get("abstract")
    has_surface = "surface" in data or "curve" in data
    if abstract is not None and has_surface:
        raise ScenarioError("abstract", "give either surface+curve or abstract, not both")
    if abstract is None:
        if "surface" not in data:
            raise ScenarioError("surface", "missing (or give an [abstract] section)")
        if "curve" not in data:
            raise ScenarioError("curve", "missing")
        for key in ("surface", "curve"):
            if not isinstance(data[key], str):
                raise ScenarioError(key, "must be a catalog id string")
        try:
            curve_on_surface(data["surface"], data["curve"])
        except (ValueError, DbxError) as exc:
            raise ScenarioError("curve", str(exc)) from None
        t_range = _pair(data.get("t_range", [0.0, 2 * np.pi]), "t_range")
    else:
        if not isinstance(abstract, dict):
            raise ScenarioError("abstract", "must be a table")
        t_range = (0.0, 2 * np.pi)
        for key in ("kappa", "tau"):
            if key not in abstract:
                raise ScenarioError(f"abstract.{key}", "missing")
            _expr(abstract[key], f"abstract.{key}")
        if "alpha" in abstract and "geodesic_torsion" in abstract:
            raise ScenarioError("abstract.alpha", "give either alpha or geodesic_torsion")
        for key in ("alpha", "geodesic_torsion"):
            if key in abstract:
                _expr(abstract[key], f"abstract.{key}")
        if "s_range" not in abstract:
            raise ScenarioError("abstract.s_range", "missing")
        _pair(abstract["s_range"], "abstract.s_range")
        unknown = sorted(set(abstract) - {"kappa", "tau", "alpha", "geodesic_torsion", "alpha0", "s_range"})
        if unknown:
            raise ScenarioError(f"abstract.{unknown[0]}", "unknown key")

    brd = data.get("breadth")
    if brd is not None:
        _validate_breadth(brd)
    tols = data.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ScenarioError("tolerances", "must be a table")
    for key, value in tols.items():
        if key not in TOLERANCE_KEYS:
            raise ScenarioError(f"tolerances.{key}", "unknown check")
        _positive(value, f"tolerances.{key}")
    return Scenario(name.strip(), samples, tol, data.get("surface"), data.get("curve"), t_range, abstract, brd,
                    {k: float(v) for k, v in tols.items()}, data.get("output_dir"))


def _validate_breadth(brd):
    if not isinstance(brd, dict):
        raise ScenarioError("breadth", "must be a table")
    method = brd.get("method")
    if method not in METHODS:
        raise ScenarioError("breadth.method", f"must be one of {', '.join(METHODS)}")
    case = brd.get("case")
    if case is not None and case not in _CASE_FLAGS:
        raise ScenarioError("breadth.case", f"must be one of {', '.join(_CASE_FLAGS)}")
    if method == "integrate":
        if case is None:
            raise ScenarioError("breadth.case", "required for method 'integrate'")
        m0 = brd.get("m0")
        if not (isinstance(m0, list) and len(m0) == 3 and all(isinstance(v, (int, float)) for v in m0)):
            raise ScenarioError("breadth.m0", "must be a list of three numbers")
    elif case is not None and case != METHODS[method][0].value:
        raise ScenarioError("breadth.case", f"method {method!r} belongs to the {METHODS[method][0].value} case")
    for key in ("c0", "c1", "c2", "c3", "phi0", "m2_0", "m3_0"):
        if key in brd and (isinstance(brd[key], bool) or not isinstance(brd[key], (int, float))):
            raise ScenarioError(f"breadth.{key}", "must be a number")
    for key in ("epsilon", "sigma"):
        if key in brd and brd[key] not in (1, -1):
            raise ScenarioError(f"breadth.{key}", "must be +1 or -1")
    if "steps" in brd and (not isinstance(brd["steps"], int) or brd["steps"] < 64):
        raise ScenarioError("breadth.steps", "must be an integer >= 64")
    if "f" in brd:
        _expr(brd["f"], "breadth.f")
    unknown = sorted(set(brd) - {"method", "case", "c0", "c1", "c2", "c3", "phi0", "epsilon", "sigma", "m0", "f",
                                 "steps", "m2_0", "m3_0"})
    if unknown:
        raise ScenarioError(f"breadth.{unknown[0]}", "unknown key")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ScenarioError("file", str(exc)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("file", f"invalid TOML: {exc}") from None
    return parse_scenario(data)


def build_samples(sc: Scenario) -> SampledCurve:
    if sc.abstract is None:
        cos = curve_on_surface(sc.surface, sc.curve, *sc.t_range)
        return sample_curve(cos, sc.samples)
    a = sc.abstract
    kwargs = {}
    if "alpha" in a:
        kwargs["alpha"] = compile_expression(a["alpha"])
    if "geodesic_torsion" in a:
        kwargs["geodesic_torsion"] = compile_expression(a["geodesic_torsion"])
    return darboux_from_abstract(
        compile_expression(a["kappa"]), compile_expression(a["tau"]), tuple(a["s_range"]), sc.samples,
        alpha0=float(a.get("alpha0", 0.0)), label=sc.name, **kwargs,
    )


@dataclass(frozen=True)
class BreadthRun:
    samples: SampledCurve
    classification: CurveClass
    case: bd.BreadthCase
    method: str
    grid: bd.CoefficientTrajectory
    pair: bd.BreadthPair
    report: VerificationReport


def _linear_alpha(samples):
    rate, a0 = np.polyfit(samples.theta, samples.alpha, 1)
    return lambda th: a0 + rate * np.asarray(th, dtype=float)


def run_breadth(sc: Scenario, force: bool = False, paper_frequency: bool = False,
                samples: Optional[SampledCurve] = None) -> BreadthRun:
    """Classify, build coefficients, construct the partner and verify it.

    Raises :class:`CaseInapplicableError` when the requested method does not
    match the curve's classification (unless ``force``).
    """
    if sc.breadth is None:
        raise ScenarioError("breadth", "missing section")
    b = sc.breadth
    samples = build_samples(sc) if samples is None else samples
    cls = classify_curve(samples, sc.default_tol())
    method = b["method"]
    kind = bd.CaseKind(b["case"]) if method == "integrate" else METHODS[method][0]
    required = METHODS[method][1] if method != "integrate" else _CASE_FLAGS[kind.value]
    missing = sorted(required - cls.flags)
    if missing and not force:
        raise CaseInapplicableError(
            f"method {method!r} needs a curve that is {' and '.join(sorted(required))}; "
            f"classification lacks {', '.join(missing)}"
        )
    epsilon = int(b.get("epsilon", cls.epsilon or 1))
    sigma = int(b.get("sigma", cls.sigma or 1))
    case = bd.BreadthCase(kind, epsilon=epsilon, sigma=sigma)
    c0, c1, c2, c3 = (float(b.get(k, 0.0)) for k in ("c0", "c1", "c2", "c3"))
    phi0 = float(b.get("phi0", cls.phi))
    steps = int(b.get("steps", bd.DEFAULT_STEPS))
    theta_end = float(samples.theta[-1])
    grid_theta = np.linspace(0.0, theta_end, steps + 1)

    alpha_fn = None
    if method == "geodesic_i":
        form = bd.geodesic_closed_form_i(c1, c2, phi0, sigma, c0, paper_frequency)
    elif method == "geodesic_ii":
        form = bd.geodesic_closed_form_ii(c1, c2, phi0, sigma)
    elif method == "asymptotic_i":
        form = bd.asymptotic_closed_form_i(c1, c2, phi0, epsilon, c0, paper_frequency)
    elif method == "asymptotic_ii":
        form = bd.asymptotic_closed_form_ii(c1, c2, phi0, epsilon)
    elif method == "principal_helix":
        alpha_fn = _linear_alpha(samples)
        form = bd.principal_closed_form_helix(c1, c2, alpha_fn, b.get("m2_0"), b.get("m3_0"), c0, paper_frequency)
    elif method == "principal_constant":
        alpha_fn = bd.case_data(samples, case)
        form = bd.principal_closed_form_planar_or_helix(c2, c3, alpha_fn, strict=not force)
    else:
        form = None

    data = bd.case_data(samples, case)
    if form is not None:
        grid = form(grid_theta)
        coeffs = form(samples.theta)
    else:
        f = compile_expression(b.get("f", "0"))
        grid = bd.integrate_system(case, b["m0"], (0.0, theta_end), theta_end / steps, data, f)
        coeffs = grid
    pair = bd.construct_partner(samples, coeffs)
    report = verify_pair(pair, case, data, sc.tolerances, coefficient_grid=grid)
    return BreadthRun(samples, cls, case, method, grid, pair, report)


def run_frame(sc: Scenario):
    samples = build_samples(sc)
    tol = sc.tolerances.get("frame_identities", sc.default_tol())
    return samples, check_frame_identities(samples, tol)
