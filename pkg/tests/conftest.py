import sys

import numpy as np
import pytest

from dbx.catalog import curve_on_surface
from dbx.frames import darboux_from_abstract, sample_curve

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def helix_cylinder():
    return sample_curve(curve_on_surface("cylinder(1)", "helix(1,1)"), 256)


@pytest.fixture(scope="session")
def helix_cylinder_512():
    return sample_curve(curve_on_surface("cylinder(1)", "helix(1,1)"), 512)


@pytest.fixture(scope="session")
def helix_helicoid():
    return sample_curve(curve_on_surface("helicoid(1)", "helix(1,1)"), 512)


@pytest.fixture(scope="session")
def great_circle():
    return sample_curve(curve_on_surface("sphere(1)", "circle(1)"), 256)


@pytest.fixture(scope="session")
def plane_circle():
    return sample_curve(curve_on_surface("plane", "circle(2)"), 256)


@pytest.fixture(scope="session")
def ellipsoid_wave():
    return sample_curve(curve_on_surface("ellipsoid(3,2,1)", "wave(0.3,3)"), 256)


@pytest.fixture(scope="session")
def principal_helix():
    """kappa = tau = 1/2 with alpha = theta, so t_g = tau - alpha' = 0."""
    return darboux_from_abstract(lambda th: 0.5, lambda th: 0.5, (0.0, 4 * np.pi), 512, alpha=lambda th: th)


def write_scenario(path, text):
    path.write_text(text)
    return str(path)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
