"""
Command-line front end
======================

``dbx frame|classify|breadth|verify <scenario.toml> [--out DIR] [--force] [--paper-frequency]``

Exit codes: 0 success, 2 invalid scenario, 3 case inapplicable,
4 verification failure, 1 any other numerical error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .classify import classify_curve
from .errors import (CaseInapplicableError, DbxError, DegenerateParameterError, InconsistentInitialDataError,
                     ScenarioError)
from .scenario import load_scenario, run_breadth, run_frame
from .verify import VerificationReport, _clean

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_INAPPLICABLE, EXIT_FAILED = 0, 1, 2, 3, 4

FRAME_COLUMNS = ("s", "theta", "Tx", "Ty", "Tz", "gx", "gy", "gz", "nx", "ny", "nz",
                 "kappa", "tau", "k_g", "k_n", "t_g", "alpha")
TRAJECTORY_COLUMNS = ("theta", "m1", "m2", "m3", "f", "breadth")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def frame_csv(samples) -> str:
    table = np.column_stack([samples.s, samples.theta, samples.T, samples.g, samples.n, samples.kappa,
                             samples.tau, samples.k_g, samples.k_n, samples.t_g, samples.alpha])
    return _csv(FRAME_COLUMNS, table)


def trajectory_csv(traj) -> str:
    table = np.column_stack([traj.theta, traj.m1, traj.m2, traj.m3, traj.f, traj.breadth])
    return _csv(TRAJECTORY_COLUMNS, table)


def pair_obj(pair) -> str:
    """Two polylines: ``beta`` (vertices 1..n) then ``beta_star`` (n+1..2n)."""
    beta, star = pair.beta.position, pair.beta_star
    n = len(beta)
    lines = ["# base curve followed by partner curve"]
    lines += ["v " + " ".join(_fmt(c) for c in p) for p in beta]
    lines += ["v " + " ".join(_fmt(c) for c in p) for p in star]
    lines += ["o beta", "l " + " ".join(str(i) for i in range(1, n + 1))]
    lines += ["o beta_star", "l " + " ".join(str(i) for i in range(n + 1, 2 * n + 1))]
    return "\n".join(lines) + "\n"


def _out_dir(args, sc):
    if args.out:
        return args.out
    if sc.output_dir:
        base = os.path.dirname(os.path.abspath(args.scenario))
        return os.path.join(base, sc.output_dir)
    return os.getcwd()


def _sidecar(out, sc, args, outputs, code):
    meta = {
        "command": args.command,
        "argv": list(args.argv),
        "scenario_file": os.path.abspath(args.scenario),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "dbx_tol": os.environ.get("DBX_TOL"),
        "outputs": sorted(outputs),
        "exit_code": code,
    }
    atomic_write(os.path.join(out, f"{sc.name}_{args.command}_run.json"), _json(meta))


def _write(out, name, text, outputs):
    path = os.path.join(out, name)
    atomic_write(path, text)
    outputs.append(name)


def _frame_report(sc, samples, check):
    return {"scenario": sc.name, "normal_orientation": samples.orientation, "samples": len(samples),
            "checks": [check.to_dict()], "overall_pass": check.passed}


def cmd_frame(sc, args, out, outputs):
    samples, check = run_frame(sc)
    _write(out, f"{sc.name}_frame.csv", frame_csv(samples), outputs)
    _write(out, f"{sc.name}_frame_report.json", _json(_frame_report(sc, samples, check)), outputs)
    print(f"{'PASS' if check.passed else 'FAIL'} frame_identities: residual {check.max_residual:.3e}")
    return EXIT_OK if check.passed else EXIT_FAILED


def cmd_classify(sc, args, out, outputs):
    samples, _ = run_frame(sc)
    cls = classify_curve(samples, sc.default_tol())
    payload = {"scenario": sc.name, "normal_orientation": samples.orientation, **cls.to_dict()}
    _write(out, f"{sc.name}_classify.json", _json(payload), outputs)
    print("flags: " + (", ".join(sorted(cls.flags)) or "(none)"))
    return EXIT_OK


def _breadth_payload(sc, run, args):
    return {
        "scenario": sc.name,
        "normal_orientation": run.samples.orientation,
        "case": run.case.to_dict(),
        "method": run.method,
        "paper_frequency": bool(args.paper_frequency),
        "forced": bool(args.force),
        "classification": run.classification.to_dict(),
        "median_breadth": float(np.median(np.linalg.norm(run.pair.offsets, axis=1))),
        **run.report.to_dict(),
    }


def cmd_breadth(sc, args, out, outputs):
    run = run_breadth(sc, force=args.force, paper_frequency=args.paper_frequency)
    _write(out, f"{sc.name}_trajectory.csv", trajectory_csv(run.grid), outputs)
    _write(out, f"{sc.name}_pair.obj", pair_obj(run.pair), outputs)
    _write(out, f"{sc.name}_verify.json", _json(_breadth_payload(sc, run, args)), outputs)
    for line in run.report.summary_lines():
        print(line)
    return EXIT_OK if run.report.overall_pass else EXIT_FAILED


def cmd_verify(sc, args, out, outputs):
    samples, frame_check = run_frame(sc)
    if sc.breadth is None:
        report = VerificationReport((frame_check,))
        payload = _frame_report(sc, samples, frame_check)
    else:
        run = run_breadth(sc, force=args.force, paper_frequency=args.paper_frequency, samples=samples)
        report = run.report
        payload = _breadth_payload(sc, run, args)
    _write(out, f"{sc.name}_verify.json", _json(payload), outputs)
    for line in report.summary_lines():
        print(line)
    return EXIT_OK if report.overall_pass else EXIT_FAILED


COMMANDS = {"frame": cmd_frame, "classify": cmd_classify, "breadth": cmd_breadth, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dbx", description="Darboux-frame invariants and constant-breadth partner curves.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("scenario", help="scenario TOML file")
    p.add_argument("--out", metavar="DIR", help="output directory (default: scenario output_dir or cwd)")
    p.add_argument("--force", action="store_true", help="run a method on a curve whose classification does not match")
    p.add_argument("--paper-frequency", action="store_true",
                   help="oscillate at 1+phi0^2 instead of sqrt(1+phi0^2) (known-wrong variant, for regression)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        sc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"dbx: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = _out_dir(args, sc)
    outputs: list = []
    try:
        code = COMMANDS[args.command](sc, args, out, outputs)
    except (ScenarioError, DegenerateParameterError) as exc:
        print(f"dbx: invalid scenario: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    except (CaseInapplicableError, InconsistentInitialDataError) as exc:
        print(f"dbx: case inapplicable: {exc}", file=sys.stderr)
        code = EXIT_INAPPLICABLE
    except DbxError as exc:
        print(f"dbx: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_ERROR
    _sidecar(out, sc, args, outputs, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
