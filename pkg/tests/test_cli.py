import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from dbx.cli import FRAME_COLUMNS, TRAJECTORY_COLUMNS, main
from dbx.errors import ScenarioError
from dbx.scenario import load_scenario, parse_scenario

HELIX = 'surface = "cylinder(1)"\ncurve = "helix(1, 1)"\n'
ABSTRACT_PRINCIPAL = """
[abstract]
kappa = "0.5"
tau = "0.5"
alpha = "theta"
s_range = [0.0, 12.566370614359172]
"""


def scenario(tmp_path, name, body):
    p = tmp_path / f"{name}.toml"
    p.write_text(f'name = "{name}"\n' + body)
    return str(p)


def run(tmp_path, *argv):
    out = tmp_path / "out"
    return main([*argv, "--out", str(out)]), out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_frame_helix(tmp_path):
    code, out = run(tmp_path, "frame", scenario(tmp_path, "hx", HELIX + "samples = 256\n"))
    assert code == 0
    header, data = read_csv(out / "hx_frame.csv")
    assert tuple(header) == FRAME_COLUMNS
    assert data.shape == (256, 17)
    assert np.max(np.abs(data[:, header.index("k_g")])) < 1e-9
    assert np.allclose(data[:, header.index("k_n")], -0.5, atol=1e-9)
    report = json.loads((out / "hx_frame_report.json").read_text())
    assert report["overall_pass"] and report["normal_orientation"] == "outward"


def test_frame_csv_seventeen_digits(tmp_path):
    _, out = run(tmp_path, "frame", scenario(tmp_path, "hx", HELIX))
    line = (out / "hx_frame.csv").read_text().splitlines()[5]
    # round-trip exact: every field parses back to the same double
    for field in line.split(","):
        assert float(format(float(field), ".17g")) == float(field)


def test_frame_plane_circle(tmp_path):
    code, out = run(tmp_path, "frame", scenario(tmp_path, "pc", 'surface = "plane"\ncurve = "circle(2)"\n'))
    assert code == 0
    header, data = read_csv(out / "pc_frame.csv")
    np.testing.assert_allclose(np.abs(data[:, header.index("k_g")]), 0.5, atol=1e-10)


def test_missing_surface(tmp_path, capsys):
    code, _ = run(tmp_path, "frame", scenario(tmp_path, "bad", 'curve = "helix(1,1)"\n'))
    assert code == 2
    assert "surface" in capsys.readouterr().err


@pytest.mark.parametrize("body,field", [
    (HELIX + "samples = 32\n", "samples"),
    (HELIX + "tol = -1.0\n", "tol"),
    (HELIX + "colour = 3\n", "colour"),
    (HELIX + ABSTRACT_PRINCIPAL, "abstract"),
    ('surface = "torus(1)"\ncurve = "helix(1,1)"\n', "curve"),
    (HELIX + "t_range = [1.0, 0.0]\n", "t_range"),
    (ABSTRACT_PRINCIPAL.replace('tau = "0.5"', 'tau = "__import__(1)"'), "abstract.tau"),
    (ABSTRACT_PRINCIPAL.replace('s_range = [0.0, 12.566370614359172]\n', ""), "abstract.s_range"),
    (HELIX + '[breadth]\nmethod = "magic"\n', "breadth.method"),
    (HELIX + '[breadth]\nmethod = "integrate"\ncase = "geodesic"\n', "breadth.m0"),
    (HELIX + '[breadth]\nmethod = "geodesic_ii"\nepsilon = 2\n', "breadth.epsilon"),
    (HELIX + '[breadth]\nmethod = "geodesic_ii"\ncase = "principal"\n', "breadth.case"),
    (HELIX + "[tolerances]\nbreadth_constancy = 0.0\n", "tolerances.breadth_constancy"),
    (HELIX + "[tolerances]\nfoo = 1.0\n", "tolerances.foo"),
])
def test_validation_field_paths(tmp_path, capsys, body, field):
    path = scenario(tmp_path, "bad", body)
    with pytest.raises(ScenarioError) as err:
        load_scenario(path)
    assert err.value.field == field
    code, _ = run(tmp_path, "classify", path)
    assert code == 2
    assert field in capsys.readouterr().err


def test_invalid_toml(tmp_path):
    p = tmp_path / "x.toml"
    p.write_text("name = \n")
    assert main(["frame", str(p), "--out", str(tmp_path)]) == 2


def test_missing_file(tmp_path):
    assert main(["frame", str(tmp_path / "nope.toml")]) == 2


def test_classify_outputs(tmp_path):
    _, out = run(tmp_path, "classify", scenario(tmp_path, "hx", HELIX))
    d = json.loads((out / "hx_classify.json").read_text())
    assert d["geodesic"] and d["helix"]
    assert not (d["asymptotic"] or d["principal"] or d["planar"])
    _, out = run(tmp_path, "classify", scenario(tmp_path, "gc", 'surface = "sphere(1)"\ncurve = "circle(1)"\n'))
    d = json.loads((out / "gc_classify.json").read_text())
    assert d["geodesic"] and d["principal"] and d["planar"] and d["helix"]
    _, out = run(tmp_path, "classify", scenario(tmp_path, "el", 'surface = "ellipsoid(3,2,1)"\ncurve = "wave(0.3,3)"\n'))
    d = json.loads((out / "el_classify.json").read_text())
    assert not any(d[k] for k in ("geodesic", "asymptotic", "principal", "helix", "planar"))
    _, out = run(tmp_path, "classify", scenario(tmp_path, "ha", 'surface = "helicoid(1)"\ncurve = "helix(1,1)"\n'))
    d = json.loads((out / "ha_classify.json").read_text())
    assert d["asymptotic"] and d["epsilon"] == -1


def test_dbx_tol_env(tmp_path, monkeypatch):
    path = scenario(tmp_path, "hx", HELIX)
    monkeypatch.setenv("DBX_TOL", "1e-30")
    _, out = run(tmp_path, "classify", path)
    assert not json.loads((out / "hx_classify.json").read_text())["geodesic"]
    # a scenario tol wins over the environment
    _, out = run(tmp_path, "classify", scenario(tmp_path, "hx2", HELIX + "tol = 1e-6\n"))
    assert json.loads((out / "hx2_classify.json").read_text())["geodesic"]
    monkeypatch.setenv("DBX_TOL", "abc")
    assert run(tmp_path, "classify", path)[0] == 2


GEODESIC_II = HELIX + "samples = 512\n[breadth]\nmethod = \"geodesic_ii\"\nc1 = 1.0\nc2 = 0.0\n"
GEODESIC_I = HELIX + "samples = 512\n[breadth]\nmethod = \"geodesic_i\"\nc1 = 1.0\nc2 = 0.0\n"
CONSTANT_COEFF = "samples = 512\n" + ABSTRACT_PRINCIPAL + "[breadth]\nmethod = \"principal_constant\"\nc2 = 3.0\nc3 = 4.0\n"


def test_breadth_geodesic_ii(tmp_path):
    code, out = run(tmp_path, "breadth", scenario(tmp_path, "g2", GEODESIC_II))
    assert code == 0
    header, data = read_csv(out / "g2_trajectory.csv")
    assert tuple(header) == TRAJECTORY_COLUMNS
    np.testing.assert_allclose(data[:, header.index("breadth")], 1.0, atol=1e-9)
    report = json.loads((out / "g2_verify.json").read_text())
    assert report["overall_pass"] and report["method"] == "geodesic_ii"
    assert report["case"] == {"kind": "geodesic", "sigma": -1}


def test_breadth_obj(tmp_path):
    _, out = run(tmp_path, "breadth", scenario(tmp_path, "g2", GEODESIC_II))
    lines = (out / "g2_pair.obj").read_text().splitlines()
    verts = [l for l in lines if l.startswith("v ")]
    polys = [l for l in lines if l.startswith("l ")]
    assert len(verts) == 1024 and len(polys) == 2
    assert [l for l in lines if l.startswith("o ")] == ["o beta", "o beta_star"]
    idx = [list(map(int, p.split()[1:])) for p in polys]
    assert idx[0] == list(range(1, 513)) and idx[1] == list(range(513, 1025))
    v = np.array([list(map(float, l.split()[1:])) for l in verts])
    np.testing.assert_allclose(np.linalg.norm(v[512:] - v[:512], axis=1), 1.0, atol=1e-9)


def test_breadth_paper_frequency(tmp_path):
    path = scenario(tmp_path, "g1", GEODESIC_I)
    assert run(tmp_path, "breadth", path)[0] == 0
    code, out = run(tmp_path, "breadth", path, "--paper-frequency")
    assert code == 4
    report = json.loads((out / "g1_verify.json").read_text())
    ode = next(c for c in report["checks"] if c["name"] == "ode_residual")
    assert not ode["passed"] and ode["max_residual"] > 0.1


def test_breadth_constant_coefficients(tmp_path):
    code, out = run(tmp_path, "breadth", scenario(tmp_path, "t4", CONSTANT_COEFF))
    assert code == 0
    header, data = read_csv(out / "t4_trajectory.csv")
    np.testing.assert_allclose(data[:, header.index("breadth")], 5.0, atol=1e-12)


def test_breadth_inapplicable_and_force(tmp_path):
    body = GEODESIC_I.replace("geodesic_i", "asymptotic_i")
    path = scenario(tmp_path, "mm", body)
    assert run(tmp_path, "breadth", path)[0] == 3
    # forced onto the wrong curve, the construction fails its own checks
    assert run(tmp_path, "breadth", path, "--force")[0] == 4


def test_constant_coefficient_precondition_exit(tmp_path):
    body = CONSTANT_COEFF.replace('alpha = "theta"', 'alpha = "theta + 0.2*theta**2"')
    path = scenario(tmp_path, "t4bad", body)
    assert run(tmp_path, "breadth", path)[0] == 3


def test_m1f_violator(tmp_path):
    body = HELIX + '[breadth]\nmethod = "integrate"\ncase = "geodesic"\nm0 = [0.5, 0.0, 1.0]\nf = "sin(theta)"\n'
    code, out = run(tmp_path, "breadth", scenario(tmp_path, "vi", body))
    assert code == 4
    checks = {c["name"]: c for c in json.loads((out / "vi_verify.json").read_text())["checks"]}
    assert not checks["m1f_constraint"]["passed"]


def test_integrate_valid(tmp_path):
    body = HELIX + '[breadth]\nmethod = "integrate"\ncase = "geodesic"\nm0 = [0.0, 0.0, -1.0]\nf = "cos(theta)"\n'
    assert run(tmp_path, "breadth", scenario(tmp_path, "iv", body))[0] == 0


def test_verify_command(tmp_path):
    code, out = run(tmp_path, "verify", scenario(tmp_path, "g2", GEODESIC_II))
    assert code == 0
    assert json.loads((out / "g2_verify.json").read_text())["overall_pass"]
    code, out = run(tmp_path, "verify", scenario(tmp_path, "fr", HELIX))
    assert code == 0


def test_breadth_without_section(tmp_path):
    assert run(tmp_path, "breadth", scenario(tmp_path, "ns", HELIX))[0] == 2


def test_phi0_zero_exit(tmp_path):
    body = GEODESIC_II + "phi0 = 0.0\n"
    assert run(tmp_path, "breadth", scenario(tmp_path, "z", body))[0] == 2


def test_determinism(tmp_path):
    path = scenario(tmp_path, "g2", GEODESIC_II)
    a, b = tmp_path / "a", tmp_path / "b"
    for cmd in ("frame", "classify", "breadth"):
        main([cmd, path, "--out", str(a)])
        main([cmd, path, "--out", str(b)])
    data = sorted(f for f in os.listdir(a) if not f.endswith("_run.json"))
    assert len(data) == 6
    for f in data:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    # no temporary files left behind
    assert not [f for f in os.listdir(a) if f.startswith(".tmp")]


def test_sidecar(tmp_path):
    _, out = run(tmp_path, "frame", scenario(tmp_path, "hx", HELIX))
    meta = json.loads((out / "hx_frame_run.json").read_text())
    assert meta["exit_code"] == 0 and meta["command"] == "frame"
    assert meta["outputs"] == ["hx_frame.csv", "hx_frame_report.json"]
    assert "timestamp" in meta


def test_output_dir_from_scenario(tmp_path, monkeypatch):
    path = scenario(tmp_path, "od", HELIX + 'output_dir = "results"\n')
    monkeypatch.chdir(tmp_path)
    assert main(["frame", path]) == 0
    assert (tmp_path / "results" / "od_frame.csv").exists()


def test_console_script(tmp_path):
    path = scenario(tmp_path, "hx", HELIX)
    proc = subprocess.run([sys.executable, "-m", "dbx.cli", "classify", path, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "geodesic" in proc.stdout


def test_parse_scenario_defaults():
    sc = parse_scenario({"name": "x", "surface": "plane", "curve": "circle(1)"})
    assert sc.samples == 256 and sc.t_range == (0.0, 2 * np.pi) and sc.tol is None
