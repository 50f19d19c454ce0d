"""Command-line front end.

    vstates eigen  {sc,dc,onefold,bstar} ...   spectrum tables (CSV)
    vstates solve  {sc,dc} ...                 one Newton solve, state files
    vstates branch {sc,dc} ...                 branch continuation, diagram data
    vstates verify ...                         rigid-rotation check of a state file

Exit codes: 0 success, 1 non-convergence or tolerance breach, 2 usage,
3 geometry violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import serialize, spectra
from .continuation import ContinuationConfig, limiting_estimate, seed_from_bifurcation, trace_branch
from .contour import SpectralGrid, mode_count
from .dynamics import evolve_rigid_check
from .errors import GeometryError, InstabilityError, SeedError, VStateError
from .residual import DoublyConnected, SimplyConnected
from .solver import NewtonConfig, newton_solve


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("VSTATE_THREADS", "1")))
    except ValueError:
        return 1


def _float_range(text: str) -> list[float]:
    """'0.1:0.9:0.1' inclusive range, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected value or start:stop:step, got {text!r}")
    start, stop, step = map(float, parts)
    if step <= 0:
        raise argparse.ArgumentTypeError("range step must be positive")
    count = int(round((stop - start) / step)) + 1
    vals = [start + i * step for i in range(count)]
    return [v for v in vals if v <= stop + 1e-12 * abs(step)]


def _int_range(text: str) -> list[int]:
    """'2:20' inclusive range, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [int(parts[0])]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected value or first:last, got {text!r}")
    first, last = int(parts[0]), int(parts[1])
    if last < first:
        raise argparse.ArgumentTypeError("empty mode range")
    return list(range(first, last + 1))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, command: str, args, node_count, outputs) -> None:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    for k, v in params.items():
        if isinstance(v, Path):
            params[k] = str(v)
    serialize.save_manifest(out / "manifest.json", command, params, node_count,
                            outputs + ["manifest.json"])


# ---------------------------------------------------------------- eigen ----

def cmd_eigen(args) -> int:
    out = _out_dir(args)
    outputs: list[str] = []
    if args.kind == "sc":
        rows = spectra.sc_eigen_rows(args.m, args.b)
        serialize.write_csv(out / "sc_eigen.csv", ["m", "b", "lambda", "omega"], rows)
        outputs.append("sc_eigen.csv")
    elif args.kind == "dc":
        rows = spectra.dc_eigen_rows(args.m, args.b1, args.points)
        serialize.write_csv(out / "dc_eigen.csv",
                            ["m", "b2", "lambda_minus", "lambda_plus"], rows)
        outputs.append("dc_eigen.csv")
        if args.mark_onefold:
            marks = [(n, x, 1.0 + x * x - args.b1 ** 2)
                     for n, x in spectra.onefold_intersections(args.b1, max(args.m))]
            serialize.write_csv(out / "onefold_marks.csv", ["n", "x_n", "lambda"], marks)
            outputs.append("onefold_marks.csv")
    elif args.kind == "onefold":
        rows = spectra.onefold_rows(args.b1, args.points)
        serialize.write_csv(out / "onefold_eigen.csv",
                            ["b2", "lambda_minus", "lambda_plus", "omega_1"], rows)
        outputs.append("onefold_eigen.csv")
    else:  # bstar
        workers = _worker_count()
        pairs = [(m, b1) for m in args.m for b1 in args.b1]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                stars = list(pool.map(lambda p: spectra.b_star(*p), pairs))
        else:
            stars = [spectra.b_star(m, b1) for m, b1 in pairs]
        rows = [(m, b1, s) for (m, b1), s in zip(pairs, stars)]
        serialize.write_csv(out / "bstar.csv", ["m", "b1", "b_star"], rows)
        outputs.append("bstar.csv")
    _manifest(out, f"eigen {args.kind}", args, None, outputs)
    return 0


# ---------------------------------------------------------------- solve ----

def cmd_solve(args) -> int:
    out = _out_dir(args)
    grid = SpectralGrid(args.N)
    cfg = NewtonConfig(fd_step=args.fd_step, tol=args.tol, max_iter=args.max_iter)
    if args.kind == "sc":
        problem = SimplyConnected(b=args.b, omega=args.omega, fold=args.m)
        modes = mode_count(grid, args.m)
        initial = np.zeros(modes)
        initial[0] = args.seed_a1
    else:
        problem = DoublyConnected(b1=args.b1, b2=args.b2, omega=args.omega, fold=args.m)
        modes = mode_count(grid, args.m)
        initial = np.zeros(2 * modes)
        initial[0] = args.seed_a11
        initial[modes] = args.seed_a21
    root, report = newton_solve(problem, initial, grid, cfg)
    from .solver import contours_from_unknowns
    contours = contours_from_unknowns(problem, root, grid)
    outputs = ["state.json", "newton_report.json"]
    serialize.write_json(out / "newton_report.json", {
        "converged": report.converged,
        "iterations": report.iterations,
        "final_sup_norm": report.final_sup_norm,
        "final_coeff_norm": report.final_coeff_norm,
        "trivial": report.trivial,
    })
    serialize.save_state(out / "state.json", args.kind, args.omega, contours, grid, report)
    if args.kind == "sc":
        serialize.save_contour(out / "contour.json", contours[0])
        serialize.save_boundary_csv(out / "boundary.csv", contours[0], grid)
        outputs += ["contour.json", "boundary.csv"]
    else:
        serialize.save_contour(out / "contour_outer.json", contours[0])
        serialize.save_contour(out / "contour_inner.json", contours[1])
        serialize.save_boundary_csv(out / "boundary_outer.csv", contours[0], grid)
        serialize.save_boundary_csv(out / "boundary_inner.csv", contours[1], grid)
        outputs += ["contour_outer.json", "contour_inner.json",
                    "boundary_outer.csv", "boundary_inner.csv"]
    _manifest(out, f"solve {args.kind}", args, args.N, outputs)
    return 0 if report.converged else 1


# --------------------------------------------------------------- branch ----

def cmd_branch(args) -> int:
    out = _out_dir(args)
    grid = SpectralGrid(args.N)
    if args.kind == "sc":
        problem = SimplyConnected(b=args.b, omega=0.0, fold=args.m)
        branch_label = "sc"
    else:
        problem = DoublyConnected(b1=args.b1, b2=args.b2, omega=0.0, fold=args.m)
        branch_label = getattr(args, "from_branch", "plus")
    delta = abs(args.delta_omega)
    if args.direction == "up":
        signed_delta, auto = delta, False
    elif args.direction == "down":
        signed_delta, auto = -delta, False
    else:
        signed_delta, auto = -delta, True
    cfg = ContinuationConfig(
        step0=args.step0, step_max=args.step_max, gap_floor=args.gap_floor,
        max_points=args.max_points, epsilon=args.eps, delta_omega=signed_delta,
        auto_flip_direction=auto, max_node_count=args.max_N,
        newton=NewtonConfig(tol=args.tol))
    seed = seed_from_bifurcation(problem, branch_label, grid,
                                 eps=args.eps, delta_omega=signed_delta)
    branch = trace_branch(seed, grid, cfg)
    est = limiting_estimate(branch, cfg)
    serialize.save_branch(out / "branch.csv", out / "branch.json", branch)
    serialize.write_json(out / "limiting.json", {
        "classification": est.classification,
        "tail_slope": est.tail_slope,
        "omega": est.point.omega,
        "gap_unit_circle": est.point.gap_unit_circle,
        "gap_boundaries": est.point.gap_boundaries,
        "termination_reason": branch.termination_reason,
    })
    outputs = ["branch.csv", "branch.json", "limiting.json"]
    _manifest(out, f"branch {args.kind}", args, args.N, outputs)
    return 0


# --------------------------------------------------------------- verify ----

def cmd_verify(args) -> int:
    out = _out_dir(args)
    data, contours = serialize.load_state(Path(args.state))
    omega = args.omega if args.omega is not None else float(data["omega"])
    node_count = args.N if args.N is not None else int(data["node_count"])
    grid = SpectralGrid(node_count)
    if args.T is None and omega == 0.0:
        print("error: --T is required when omega is zero", file=sys.stderr)
        return 2
    duration = args.T if args.T is not None else 2 * np.pi / (contours[0].fold * abs(omega))
    try:
        report = evolve_rigid_check(contours if len(contours) > 1 else contours[0],
                                    omega, duration, args.steps, grid)
    except InstabilityError as exc:
        serialize.write_json(out / "verify_report.json", {
            "passed": False, "instability_time": exc.time, "error": str(exc)})
        _manifest(out, "verify", args, node_count, ["verify_report.json"])
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    passed = report.max_deviation <= args.tol
    serialize.write_json(out / "verify_report.json", {
        "passed": bool(passed),
        "max_deviation": report.max_deviation,
        "tolerance": args.tol,
        "area_drift": report.area_drift,
        "sampled_times": report.sampled_times.tolist(),
        "deviations": report.deviations.tolist(),
    })
    serialize.save_snapshots_csv(out / "snapshots.csv", report.snapshots)
    _manifest(out, "verify", args, node_count,
              ["verify_report.json", "snapshots.csv"])
    print(f"{'PASS' if passed else 'FAIL'}: max deviation {report.max_deviation:.3e} "
          f"(tolerance {args.tol:.3e})")
    return 0 if passed else 1


# ----------------------------------------------------------------- main ----

def _add_newton_flags(p) -> None:
    p.add_argument("--fd-step", dest="fd_step", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=50)


def _add_branch_flags(p) -> None:
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--delta-omega", dest="delta_omega", type=float, default=1e-3)
    p.add_argument("--direction", choices=["auto", "down", "up"], default="auto")
    p.add_argument("--step0", type=float, default=5e-3)
    p.add_argument("--step-max", dest="step_max", type=float, default=5e-2)
    p.add_argument("--gap-floor", dest="gap_floor", type=float, default=5e-3)
    p.add_argument("--max-points", dest="max_points", type=int, default=400)
    p.add_argument("--max-N", dest="max_N", type=int, default=2048)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vstates", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    eigen = sub.add_parser("eigen", help="spectrum tables")
    ek = eigen.add_subparsers(dest="kind", required=True)
    p = ek.add_parser("sc")
    p.add_argument("--b", type=_float_range, required=True)
    p.add_argument("--m", type=_int_range, required=True)
    p.add_argument("--out", required=True)
    p = ek.add_parser("dc")
    p.add_argument("--b1", type=float, required=True)
    p.add_argument("--m", type=_int_range, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--mark-onefold", dest="mark_onefold", action="store_true")
    p.add_argument("--out", required=True)
    p = ek.add_parser("onefold")
    p.add_argument("--b1", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", required=True)
    p = ek.add_parser("bstar")
    p.add_argument("--b1", type=_float_range, required=True)
    p.add_argument("--m", type=_int_range, required=True)
    p.add_argument("--out", required=True)
    eigen.set_defaults(func=cmd_eigen)

    solve = sub.add_parser("solve", help="single Newton solve")
    sk = solve.add_subparsers(dest="kind", required=True)
    p = sk.add_parser("sc")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--seed-a1", dest="seed_a1", type=float, default=1e-3)
    p.add_argument("--N", type=int, default=256)
    _add_newton_flags(p)
    p.add_argument("--out", required=True)
    p = sk.add_parser("dc")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b1", type=float, required=True)
    p.add_argument("--b2", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--seed-a11", dest="seed_a11", type=float, default=1e-3)
    p.add_argument("--seed-a21", dest="seed_a21", type=float, default=-1e-3)
    p.add_argument("--N", type=int, default=256)
    _add_newton_flags(p)
    p.add_argument("--out", required=True)
    solve.set_defaults(func=cmd_solve)

    branch = sub.add_parser("branch", help="trace a bifurcation branch")
    bk = branch.add_subparsers(dest="kind", required=True)
    p = bk.add_parser("sc")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=float, required=True)
    _add_branch_flags(p)
    p = bk.add_parser("dc")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b1", type=float, required=True)
    p.add_argument("--b2", type=float, required=True)
    p.add_argument("--from", dest="from_branch", choices=["plus", "minus"], default="plus")
    _add_branch_flags(p)
    branch.set_defaults(func=cmd_branch)

    verify = sub.add_parser("verify", help="rigid-rotation verification")
    verify.add_argument("--state", required=True)
    verify.add_argument("--omega", type=float, default=None)
    verify.add_argument("--T", type=float, default=None)
    verify.add_argument("--steps", type=int, default=2000)
    verify.add_argument("--tol", type=float, default=1e-4)
    verify.add_argument("--N", type=int, default=None)
    verify.add_argument("--out", required=True)
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GeometryError as exc:
        print(f"geometry violation: {exc}", file=sys.stderr)
        return 3
    except SeedError as exc:
        print(f"seeding failed: {exc}", file=sys.stderr)
        return 1
    except VStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
