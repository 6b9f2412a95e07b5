"""Command-line front end.

Exit codes: 0 success, 1 mathematical failure (validation, attainability,
convergence, disagreement), 2 I/O or parse error, 3 vertex count above the
enumeration guard, 4 failed precondition.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from . import flow
from .attainability import MAX_ENUMERATION_VERTICES, ScaleGuardError, check_target
from .complex import (
    C1_TOL,
    Geometry,
    InvalidComplexError,
    MeshFormatError,
    MeshIndexError,
    check_c1,
    load_angles,
    load_complex,
    validate,
)
from .layout import SvgOptions, develop, to_svg

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 2
EXIT_SCALE = 3
EXIT_PRECONDITION = 4

AGREEMENT_TOL = 1e-8


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc


def _read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, f"{path} is not valid JSON: {exc}") from exc


def _load_mesh(args):
    text = _read_text(args.mesh)
    try:
        cx = load_complex(text, check=False)
        theta = load_angles(text)
    except (MeshFormatError, MeshIndexError) as exc:
        raise CliError(EXIT_IO, f"{args.mesh}: {exc}") from exc
    inputs = {str(args.mesh): _digest(args.mesh)}
    if getattr(args, "theta", None):
        data = _read_json(args.theta)
        if not isinstance(data, list):
            raise CliError(EXIT_IO, f"{args.theta} must hold a JSON array of angles")
        theta = np.array(data, dtype=float)
        inputs[str(args.theta)] = _digest(args.theta)
    if theta is not None and theta.shape != (cx.num_edges,):
        raise CliError(EXIT_IO, f"theta has {theta.size} entries for {cx.num_edges} edges")
    return cx, theta, inputs


def _require_valid(cx, theta, geometry):
    report = validate(cx, geometry)
    if not report.ok:
        raise CliError(EXIT_PRECONDITION, "; ".join(report.violations))
    if theta is None:
        raise CliError(EXIT_PRECONDITION, "no angle assignment (mesh has no theta and --theta not given)")
    if np.any(~((theta > 0) & (theta < np.pi))):
        raise CliError(EXIT_PRECONDITION, "theta values must lie in (0, pi)")
    dev = check_c1(cx, theta)
    if dev.size and np.max(np.abs(dev)) > C1_TOL:
        f = int(np.argmax(np.abs(dev)))
        raise CliError(EXIT_PRECONDITION, f"face {f} violates (C1): angle sum - pi = {dev[f]:.3e}")


def _target(args, cx, geometry, inputs):
    source = args.target
    if source == "zero":
        k = np.zeros(cx.num_vertices)
        if geometry is Geometry.EUCLIDEAN and cx.euler_characteristic != 0:
            raise CliError(EXIT_PRECONDITION,
                           "Euclidean target zero needs chi = 0 (Gauss-Bonnet sum K = 2 pi chi)")
        return k
    if source.lstrip().startswith("["):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_IO, f"cannot parse target {source!r}: {exc}") from exc
    else:
        data = _read_json(source)
        inputs[source] = _digest(source)
    try:
        k = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_IO, f"target must be an array of numbers: {exc}") from exc
    if k.shape != (cx.num_vertices,):
        raise CliError(EXIT_IO, f"target has {k.size} entries for {cx.num_vertices} vertices")
    return k


def _initial_radii(args, n, inputs):
    source = args.r0
    if source == "ones":
        return np.ones(n)
    if source == "random":
        rng = np.random.default_rng(args.seed)
        return np.exp(rng.uniform(math.log(0.1), math.log(10.0), n))
    data = _read_json(source)
    inputs[source] = _digest(source)
    r0 = np.array(data.get("final_r") if isinstance(data, dict) else data, dtype=float)
    if r0.shape != (n,) or np.any(~(r0 > 0)):
        raise CliError(EXIT_IO, f"{source} must hold {n} positive radii")
    return r0


def _config(args):
    try:
        return flow.SolverConfig(
            residual_tol=args.residual_tol if args.residual_tol is not None
            else flow._default_residual_tol(),
            max_steps=args.max_steps,
            dt_init=args.dt_init,
            dt_min=args.dt_min,
            dt_max=args.dt_max,
            trajectory_stride=args.stride,
            check_attainability=not args.skip_attainability,
            track_potential=getattr(args, "potential", False),
        )
    except ValueError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc


def _manifest(args, inputs, **extra):
    out = {
        "command": ["idealflow", *args.argv],
        "inputs": dict(sorted(inputs.items())),
        "geometry": getattr(args, "geometry", None),
        "version": __version__,
        "backend": _kernels.backend_name(),
        "threads": getattr(args, "threads", 1),
    }
    out.update(extra)
    return out


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def trajectory_csv(report, with_lambda=False):
    """CSV text with columns t, residual, energy, sum_u[, lambda]."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["t", "residual", "energy", "sum_u"] + (["lambda"] if with_lambda else [])
    writer.writerow(header)
    for s in report.trajectory:
        row = [s.t, s.residual, s.energy, s.sum_u]
        if with_lambda:
            row.append(s.lam if s.lam is not None else float("nan"))
        writer.writerow([f"{x:.16e}" for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args):
    geometry = Geometry.parse(args.geometry)
    cx, theta, inputs = _load_mesh(args)
    report = validate(cx, geometry)
    out = report.to_dict()
    ok = report.ok
    if theta is not None and report.ok:
        dev = check_c1(cx, theta)
        out["c1_deviation"] = dev.tolist()
        bad = [int(f) for f in np.flatnonzero(np.abs(dev) > C1_TOL)]
        if np.any(~((theta > 0) & (theta < np.pi))):
            out["violations"].append("theta values must lie in (0, pi)")
            ok = False
        for f in bad:
            out["violations"].append(f"face {f} violates (C1): angle sum - pi = {dev[f]:.3e}")
        ok = ok and not bad
    out["ok"] = ok
    out["manifest"] = _manifest(args, inputs)
    _emit(_dump_json(out), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(args):
    geometry = Geometry.parse(args.geometry)
    cx, theta, inputs = _load_mesh(args)
    if theta is None:
        raise CliError(EXIT_PRECONDITION, "no angle assignment (mesh has no theta and --theta not given)")
    k = _target(args, cx, geometry, inputs)
    try:
        report = check_target(cx, theta, k, geometry)
    except ScaleGuardError as exc:
        raise CliError(EXIT_SCALE, str(exc)) from exc
    except ValueError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc
    out = report.to_dict()
    out["target"] = k.tolist()
    out["manifest"] = _manifest(args, inputs)
    _emit(_dump_json(out), args.output)
    return EXIT_OK if report.attainable else EXIT_FAIL


def _gate_attainability(args, cx, theta, k, geometry):
    if args.skip_attainability:
        return
    if cx.num_vertices > MAX_ENUMERATION_VERTICES:
        return
    rep = check_target(cx, theta, k, geometry)
    if not rep.attainable:
        raise CliError(EXIT_PRECONDITION,
                       f"target is not attainable ({rep.failed_condition.value}, "
                       f"witness {list(rep.witness_subset or [])})")


def cmd_solve(args):
    geometry = Geometry.parse(args.geometry)
    cx, theta, inputs = _load_mesh(args)
    _require_valid(cx, theta, geometry)
    k = _target(args, cx, geometry, inputs)
    _gate_attainability(args, cx, theta, k, geometry)
    r0 = _initial_radii(args, cx.num_vertices, inputs)
    config = _config(args)
    solver = flow.SOLVERS[args.solver]
    code = EXIT_OK
    try:
        report = solver(cx, theta, k, r0, geometry, config)
    except flow.ConvergenceError as exc:
        report = exc.report
        code = EXIT_FAIL
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except flow.PreconditionError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc

    out = report.to_dict()
    out["target"] = k.tolist()
    out["initial_r"] = r0.tolist()
    out["manifest"] = _manifest(args, inputs, solver=args.solver, config=config.to_dict(),
                                seed=args.seed)
    _emit(_dump_json(out), args.report)
    if args.trajectory:
        _emit(trajectory_csv(report, with_lambda=args.potential), args.trajectory)
    return code


def cmd_layout(args):
    geometry = Geometry.parse(args.geometry)
    cx, theta, inputs = _load_mesh(args)
    if theta is None:
        raise CliError(EXIT_PRECONDITION, "no angle assignment (mesh has no theta and --theta not given)")
    data = _read_json(args.radii)
    inputs[str(args.radii)] = _digest(args.radii)
    if isinstance(data, dict):
        data = data.get("final_r")
    try:
        r = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_IO, f"{args.radii}: radii must be numbers") from exc
    if r.shape != (cx.num_vertices,) or np.any(~(r > 0)):
        raise CliError(EXIT_IO, f"{args.radii} must hold {cx.num_vertices} positive radii")
    layout = develop(cx, theta, r, geometry)
    opts = SvgOptions(size=args.size, stroke_width=args.stroke_width,
                      draw_spokes=not args.no_spokes)
    _emit(to_svg(layout, opts), args.output)
    return EXIT_OK


def _normalized(report, geometry):
    if geometry is Geometry.EUCLIDEAN:
        return np.exp(flow.normalize_scale(report.final_u))
    return report.final_r


def cmd_compare(args):
    geometry = Geometry.parse(args.geometry)
    cx, theta, inputs = _load_mesh(args)
    _require_valid(cx, theta, geometry)
    k = _target(args, cx, geometry, inputs)
    if cx.num_vertices > MAX_ENUMERATION_VERTICES and not args.skip_attainability:
        raise CliError(EXIT_SCALE, f"{cx.num_vertices} vertices exceed the enumeration guard; "
                                   "pass --skip-attainability to run unguarded")
    _gate_attainability(args, cx, theta, k, geometry)
    r0 = _initial_radii(args, cx.num_vertices, inputs)
    config = _config(args)

    runs = {}
    ok = True
    for name, solver in flow.SOLVERS.items():
        try:
            runs[name] = solver(cx, theta, k, r0, geometry, config)
        except flow.ConvergenceError as exc:
            runs[name] = exc.report
            ok = False
        except np.linalg.LinAlgError as exc:
            print(f"error: {name}: {exc}", file=sys.stderr)
            runs[name] = None
            ok = False

    distances = {}
    for a, b in itertools.combinations(flow.SOLVERS, 2):
        if runs[a] is None or runs[b] is None:
            continue
        d = float(np.max(np.abs(_normalized(runs[a], geometry) - _normalized(runs[b], geometry))))
        distances[f"{a}-{b}"] = d
        ok = ok and d <= AGREEMENT_TOL
    out = {
        "agree": ok,
        "tolerance": AGREEMENT_TOL,
        "pairwise_max_abs_r": distances,
        "solvers": {
            name: None if rep is None else {
                "converged": rep.converged,
                "status": rep.status,
                "steps": rep.steps,
                "final_r": rep.final_r.tolist(),
                "final_residual": rep.final_residual,
            }
            for name, rep in runs.items()
        },
        "target": k.tolist(),
        "manifest": _manifest(args, inputs, config=config.to_dict(), seed=args.seed),
    }
    _emit(_dump_json(out), args.output)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _mesh_args(p, geometry_required=True):
    p.add_argument("mesh", help="mesh JSON file")
    p.add_argument("--geometry", choices=[g.value for g in Geometry], required=geometry_required)
    p.add_argument("--theta", help="JSON array of edge angles (radians); overrides the mesh's theta")


def _solver_args(p):
    p.add_argument("--target", default="zero",
                   help="'zero', an inline JSON array, or a JSON file with one curvature per vertex")
    p.add_argument("--r0", default="ones",
                   help="'ones', 'random' (log-uniform in [0.1, 10]), or a JSON file of radii")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--residual-tol", type=float, default=None,
                   help=f"default 1e-10, or ${flow.RESIDUAL_TOL_ENV}")
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--dt-init", type=float, default=0.1)
    p.add_argument("--dt-min", type=float, default=1e-12)
    p.add_argument("--dt-max", type=float, default=10.0)
    p.add_argument("--stride", type=int, default=1, help="trajectory sampling stride")
    p.add_argument("--skip-attainability", action="store_true",
                   help="do not enumerate vertex subsets before solving")
    p.add_argument("--threads", type=int, default=1,
                   help="kernel threads; the kernels are sequential, so results are "
                        "reproducible for every value")


def build_parser():
    parser = argparse.ArgumentParser(prog="idealflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the complex, Euler characteristic and (C1)")
    _mesh_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="decide attainability of a target curvature")
    _mesh_args(p)
    p.add_argument("--target", default="zero")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve for radii with prescribed curvature")
    _mesh_args(p)
    _solver_args(p)
    p.add_argument("--solver", choices=sorted(flow.SOLVERS), default="calabi")
    p.add_argument("--report", "-o", help="JSON report path (default stdout)")
    p.add_argument("--trajectory", help="CSV trajectory path")
    p.add_argument("--potential", action="store_true",
                   help="add the Lyapunov function to the trajectory (lambda column)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("layout", help="develop a metric and write an SVG drawing")
    _mesh_args(p)
    p.add_argument("--radii", required=True, help="JSON array of radii or a solve report")
    p.add_argument("--output", "-o", help="SVG path (default stdout)")
    p.add_argument("--size", type=float, default=800.0)
    p.add_argument("--stroke-width", type=float, default=1.0)
    p.add_argument("--no-spokes", action="store_true", help="omit sub-triangle edges")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("compare", help="run all solvers and compare their limits")
    _mesh_args(p)
    _solver_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    args.argv = argv
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_IO
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InvalidComplexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
