"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line, printed in the terminal summary (see
conftest.py).  Run alone with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import dataclasses
import time

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from dbx import breadth as bd
from dbx.breadth import BreadthCase, CoefficientTrajectory, Provenance, integrate_system
from dbx.catalog import curve_on_surface
from dbx.cli import main
from dbx.frames import SampledCurve, darboux_from_abstract, sample_curve
from dbx.verify import (FAIL, INCONCLUSIVE, check_breadth_constancy, check_frame_identities, check_m1f_constraint,
                        check_ode_residual, check_tangent_opposition, frame_residuals)

RESULTS = {}
TH = np.linspace(0.0, 2 * np.pi, 4097)
PHIS = (0.5, 1.0, 2.0)
COEFFS = ((1.0, 0.0), (0.0, 1.0), (2.0, -3.0))


def record(n, ok, detail, started):
    RESULTS[n] = (bool(ok), f"{detail} [{time.perf_counter() - started:.2f} s]")
    assert ok, detail


def abstract_curve(kind, phi0, n=256):
    """Unit-curvature curves on [0, 2 pi] with the theta range equal to s."""
    one = lambda th: 1.0
    if kind == "geodesic":
        return darboux_from_abstract(one, lambda th: phi0, (0.0, 2 * np.pi), n, alpha0=np.pi / 2)
    if kind == "asymptotic":
        return darboux_from_abstract(one, lambda th: phi0, (0.0, 2 * np.pi), n, alpha0=0.0)
    return darboux_from_abstract(one, lambda th: phi0, (0.0, 2 * np.pi), n, alpha=lambda th: phi0 * th)


def test_criterion_1_frame_identities():
    t0 = time.perf_counter()
    worst = {}
    for surf, curve in (("cylinder(1)", "helix(1,1)"), ("sphere(1)", "circle(1)"), ("plane", "circle(2)")):
        sc = sample_curve(curve_on_surface(surf, curve), 256)
        res = frame_residuals(sc)
        split = np.max(np.abs(sc.k_g**2 + sc.k_n**2 - sc.kappa**2))
        worst[f"{curve} on {surf}"] = max(split, res["geodesic_torsion"].max())
    top = max(worst.values())
    record(1, top < 1e-6, f"max residual {top:.2e} < 1e-06 over 3 fixtures", t0)


def test_criterion_2_conservation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20261014)
    systems = [(BreadthCase.geodesic(), 1.3), (BreadthCase.asymptotic(-1), 0.7),
               (BreadthCase.principal(), lambda th: 0.4 * th + 0.1 * np.sin(th))]
    worst = 0.0
    for case, data in systems:
        for _ in range(5):
            m0 = rng.normal(size=3)
            traj = integrate_system(case, m0, (0.0, 4 * np.pi), data=data)
            worst = max(worst, traj.drift)
    record(2, worst < 1e-8, f"max relative drift {worst:.2e} < 1e-08 (3 systems x 5 starts, theta in [0, 4 pi])", t0)


def _forms(phi0, c):
    return {
        "geodesic_i": ("geodesic", bd.geodesic_closed_form_i(c[0], c[1], phi0), phi0),
        "geodesic_ii": ("geodesic", bd.geodesic_closed_form_ii(c[0], c[1], phi0), phi0),
        "asymptotic_i": ("asymptotic", bd.asymptotic_closed_form_i(c[0], c[1], phi0), phi0),
        "asymptotic_ii": ("asymptotic", bd.asymptotic_closed_form_ii(c[0], c[1], phi0), phi0),
        "principal_constant": ("principal", bd.principal_closed_form_planar_or_helix(c[0], c[1], lambda th: phi0 * th),
              lambda th: phi0 * th),
    }


def test_criterion_3_closed_forms():
    t0 = time.perf_counter()
    curves = {(k, p): abstract_curve(k, p) for k in ("geodesic", "asymptotic", "principal") for p in PHIS}
    worst_ode = worst_breadth = 0.0
    count = 0
    for phi0 in PHIS:
        for c in COEFFS:
            for name, (kind, form, data) in _forms(phi0, c).items():
                ode = check_ode_residual(form(TH), form.case, data)
                pair = bd.construct_partner(curves[kind, phi0], form(curves[kind, phi0].theta))
                br = check_breadth_constancy(pair)
                assert ode.passed and br.passed, (name, phi0, c, ode.max_residual, br.max_residual)
                worst_ode = max(worst_ode, ode.max_residual)
                worst_breadth = max(worst_breadth, br.max_residual)
                count += 1
    ok = worst_ode < 1e-6 and worst_breadth < 1e-9
    record(3, ok, f"{count} trajectories: ode residual {worst_ode:.2e} < 1e-06, breadth {worst_breadth:.2e} < 1e-09",
           t0)


def test_criterion_4_paper_frequency(tmp_path):
    t0 = time.perf_counter()
    wrong_freq = check_ode_residual(bd.geodesic_closed_form_i(1.0, 0.0, 1.0, paper_frequency=True)(TH),
                                 BreadthCase.geodesic(), 1.0)
    path = tmp_path / "g1.toml"
    path.write_text('name = "g1"\nsurface = "cylinder(1)"\ncurve = "helix(1,1)"\n'
                    '[breadth]\nmethod = "geodesic_i"\nc1 = 1.0\nc2 = 0.0\n')
    code = main(["breadth", str(path), "--out", str(tmp_path), "--paper-frequency"])
    ok = wrong_freq.max_residual > 0.1 and code == 4
    record(4, ok, f"frequency 1+phi0^2 ode residual {wrong_freq.max_residual:.3f} > 0.1, CLI exit {code} (expected 4)", t0)


def test_criterion_5_pair_properties():
    t0 = time.perf_counter()
    sc = sample_curve(curve_on_surface("cylinder(1)", "helix(1,1)"), 512)
    form = bd.geodesic_closed_form_ii(1.0, 0.0, 1.0, sigma=-1)
    pair = bd.construct_partner(sc, form(TH))
    dist = np.max(np.abs(np.linalg.norm(pair.offsets, axis=1) - 1.0))
    tang = check_tangent_opposition(pair, 1e-4)
    ok = dist < 1e-9 and tang.passed
    record(5, ok, f"| |b*-b| - 1 | = {dist:.2e} < 1e-09, tangent angle {tang.max_residual:.2e} < 1e-04 rad", t0)


def test_criterion_6_constant_coefficients():
    t0 = time.perf_counter()
    sc = darboux_from_abstract(lambda th: 0.5, lambda th: 0.5, (0.0, 4 * np.pi), 512, alpha=lambda th: th)
    alpha = bd.case_data(sc, BreadthCase.principal())
    traj = bd.principal_closed_form_planar_or_helix(3.0, 4.0, alpha)(sc.theta)
    pair = bd.construct_partner(sc, traj)
    dist = np.max(np.abs(np.linalg.norm(pair.offsets, axis=1) - 5.0))
    # fixture has alpha = theta exactly; compare against that rather than the sampled alpha
    ferr = np.max(np.abs(pair.coefficients.f - (3 * np.cos(sc.theta) + 4 * np.sin(sc.theta))))
    ok = dist < 1e-12 and ferr < 1e-10
    record(6, ok, f"breadth error {dist:.2e} < 1e-12, f error {ferr:.2e} < 1e-10", t0)


def test_criterion_7_m1f(tmp_path):
    t0 = time.perf_counter()
    forms = [bd.geodesic_closed_form_i(1.0, 2.0, 1.0, c0=0.5), bd.geodesic_closed_form_ii(1.0, 2.0, 1.0),
             bd.asymptotic_closed_form_i(1.0, 2.0, 1.0, c0=0.5), bd.asymptotic_closed_form_ii(1.0, 2.0, 1.0),
             bd.principal_closed_form_helix(1.0, 2.0, lambda th: th, c0=0.5),
             bd.principal_closed_form_planar_or_helix(3.0, 4.0, lambda th: th)]
    worst = max(np.max(np.abs(f(TH).m1 * f(TH).f)) for f in forms)
    path = tmp_path / "vi.toml"
    path.write_text('name = "vi"\nsurface = "cylinder(1)"\ncurve = "helix(1,1)"\n'
                    '[breadth]\nmethod = "integrate"\ncase = "geodesic"\nm0 = [0.5, 0.0, 1.0]\nf = "sin(theta)"\n')
    code = main(["breadth", str(path), "--out", str(tmp_path)])
    ok = worst < 1e-12 and code == 4
    record(7, ok, f"max |m1 f| over 6 closed forms {worst:.1e} < 1e-12, injected violator exit {code} (expected 4)", t0)


def test_criterion_8_cross_validation():
    """Every closed-form family once; the full parameter grid runs in test_breadth.py."""
    t0 = time.perf_counter()
    c = (2.0, -3.0)
    forms = {
        "geodesic_i": (bd.geodesic_closed_form_i(*c, 0.5), 0.5),
        "geodesic_ii": (bd.geodesic_closed_form_ii(*c, 1.0), 1.0),
        "asymptotic_i": (bd.asymptotic_closed_form_i(*c, 2.0, epsilon=-1), 2.0),
        "asymptotic_ii": (bd.asymptotic_closed_form_ii(*c, 0.5), 0.5),
        "principal_helix": (bd.principal_closed_form_helix(*c, lambda th: 1.0 * th), lambda th: 1.0 * th),
        "principal_constant": (bd.principal_closed_form_planar_or_helix(*c, lambda th: 2.0 * th), lambda th: 2.0 * th),
    }
    worst = {}
    for name, (form, data) in forms.items():
        num = integrate_system(form.case, form.initial(), (0.0, 2 * np.pi), data=data, f=form.f_function())
        worst[name] = np.max(np.abs(num.m - form(TH).m))
    top = max(worst.values())
    record(8, top < 1e-7, f"max |closed - integrated| {top:.2e} < 1e-07 over cases {', '.join(sorted(worst))}", t0)


def _corrupt_m(traj, fn):
    m = traj.m.copy()
    fn(m, traj.theta)
    return dataclasses.replace(traj, m=m, dm=None)


def test_criterion_9_negative_controls(tmp_path):
    t0 = time.perf_counter()
    sc = sample_curve(curve_on_surface("cylinder(1)", "helix(1,1)"), 256)
    good = bd.geodesic_closed_form_ii(1.0, 0.0, 1.0, sigma=-1)(sc.theta)
    outcomes = {}

    def half(m, th):
        m[1, len(th) // 2:] *= 1.01

    outcomes["breadth"] = check_breadth_constancy(bd.construct_partner(sc, _corrupt_m(good, half))).status == FAIL

    def wobble(m, th):
        m[2] += 0.2 * np.sin(3 * th)

    outcomes["tangent"] = check_tangent_opposition(bd.construct_partner(sc, _corrupt_m(good, wobble))).status == FAIL
    zero = bd.geodesic_closed_form_ii(0.0, 0.0, 1.0)(sc.theta)
    outcomes["tangent_identity"] = (
        check_tangent_opposition(bd.construct_partner(sc, zero)).status == INCONCLUSIVE)
    wrong_freq = bd.geodesic_closed_form_i(1.0, 0.0, 1.0, paper_frequency=True)(TH)
    outcomes["ode"] = check_ode_residual(wrong_freq, BreadthCase.geodesic(), 1.0).status == FAIL
    s = np.sin(TH)
    inj = CoefficientTrajectory(TH, np.array([s, 0 * s, 0 * s]), s, BreadthCase.geodesic(), Provenance.INTEGRATED)
    outcomes["m1f"] = check_m1f_constraint(inj).status == FAIL
    cols = {k: sc.column(k) for k in ("s", "theta", "kappa", "tau", "k_g", "k_n", "t_g", "alpha")}
    for k in ("position", "T", "g", "n", "N", "B"):
        cols[k] = np.array([getattr(x, k) for x in sc])
    cols["g"] = cols["g"] @ Rotation.from_rotvec([0.02, -0.01, 0.03]).as_matrix().T
    outcomes["frame"] = check_frame_identities(SampledCurve.from_arrays(**cols)).status == FAIL

    helix = 'surface = "cylinder(1)"\ncurve = "helix(1,1)"\n'
    files = {
        0: helix + '[breadth]\nmethod = "geodesic_ii"\nc1 = 1.0\n',
        2: 'curve = "helix(1,1)"\n',
        3: helix + '[breadth]\nmethod = "asymptotic_i"\nc1 = 1.0\n',
        4: helix + '[breadth]\nmethod = "geodesic_i"\nc1 = 1.0\n',
    }
    for expected, body in files.items():
        p = tmp_path / f"e{expected}.toml"
        p.write_text(f'name = "e{expected}"\n' + body)
        extra = ["--paper-frequency"] if expected == 4 else []
        outcomes[f"exit{expected}"] = main(["breadth", str(p), "--out", str(tmp_path), *extra]) == expected
    failed = sorted(k for k, v in outcomes.items() if not v)
    record(9, not failed, f"{len(outcomes)} controls; unexpected: {', '.join(failed) or 'none'}", t0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
