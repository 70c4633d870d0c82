# cli.py
"""Command-line front end.

    python cli.py distance  --curve1 C1 --curve2 C2 [--theta-csv PATH] [--timing]
    python cli.py solve-bvp --curve1 C1 --curve2 C2 [--theta-csv PATH]
    python cli.py sweep     --curve1 C1 --curve2 C2 --lambda-range a,b --steps K [--out PATH]
    python cli.py check

Curves are given as a JSON/CSV file path or as inline generator JSON, e.g.
'{"kind": "circle", "params": {"r": 1.0}}'.

Exit codes: 0 success, 1 bad input, 2 solver failure, 3 failed invariant check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from bvp import (
    CriticalPoint,
    ShootingProblem,
    dedup_critical_points,
    default_starts,
    solve_bvp_multistart,
    theta_lift,
)
from checks import run_checks
from config import (
    COMPONENTS,
    DEDUP_TOL,
    DEFAULT_GRID,
    DEFAULT_JET_ORDER,
    DEFAULT_STARTS,
    DEFAULT_TOL,
    INTEGRATOR_SCHEMES,
    KINETIC_FORMS,
    QUADRATURES,
    SCAN_ANGLES,
    SCHEMA_VERSION,
    RunConfig,
    parse_weights,
)
from curves import CSV_FLOAT_FORMAT, Curve, curve_to_dict, parse_curve_spec
from distance import distance, distance_between_jets
from errors import AllStartsFailed, CurveDistanceError, DimensionMismatch, InvalidConfig, SolverError
from jets import jet_field
import runs

logger = logging.getLogger("curvedist.cli")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3
SWEEP_COLUMNS = ["lambda", "energy_best", "winding", "branch_count", "status"]


# ------- argument parsing -------

def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=DEFAULT_JET_ORDER, help="jet order")
    p.add_argument("--lambda", dest="weights", default="", help="comma list lambda_1,...,lambda_k")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="number of grid intervals N")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--starts", type=int, default=DEFAULT_STARTS)
    p.add_argument("--component", choices=COMPONENTS, default="so", help="'o' also shoots from reflections")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=INTEGRATOR_SCHEMES, default="leapfrog")
    p.add_argument("--kinetic", choices=KINETIC_FORMS, default="log")
    p.add_argument("--quadrature", choices=QUADRATURES, default="trapezoid")
    p.add_argument("--scan", type=int, default=SCAN_ANGLES, help="theta(0) samples bracketing planar roots (0 = off)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true", help="emit JSON (sweep rows default to CSV)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _add_curve_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--curve1", required=True, metavar="FILE|JSON")
    p.add_argument("--curve2", required=True, metavar="FILE|JSON")
    p.add_argument("--db", default=None, metavar="URL", help="run store URL (implies --record)")
    p.add_argument("--record", action="store_true", help="store the run in the run store")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvedist", description="Rigid-motion invariant curve distances")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="distance between two curves")
    _add_curve_options(p)
    _add_run_options(p)
    p.add_argument("--theta-csv", default=None, metavar="PATH", help="write s,theta of the minimizer (n = 2)")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(handler=cmd_distance)

    p = sub.add_parser("solve-bvp", help="critical points of the energy by multi-start shooting")
    _add_curve_options(p)
    _add_run_options(p)
    p.add_argument("--theta-csv", default=None, metavar="PATH")
    p.set_defaults(handler=cmd_solve_bvp)

    p = sub.add_parser("sweep", help="sweep lambda_1 and track the best branch")
    _add_curve_options(p)
    _add_run_options(p)
    p.add_argument("--lambda-range", required=True, metavar="A,B")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--method", choices=("shooting", "distance"), default="shooting")
    p.add_argument("--out", default=None, metavar="PATH", help="CSV output file (default stdout)")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("check", help="run the invariant suite")
    _add_run_options(p)
    p.set_defaults(handler=cmd_check)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        k=args.k,
        weights=parse_weights(args.weights) if args.weights else (),
        grid=args.grid,
        tol=args.tol,
        starts=args.starts,
        component=args.component,
        seed=args.seed,
        scheme=args.scheme,
        kinetic=args.kinetic,
        quadrature=args.quadrature,
        scan=args.scan,
        workers=args.workers,
    )


# ------- output helpers -------

def _emit_json(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _curve_label(c: Curve) -> dict:
    return {"kind": c.kind, "n": c.n}


def _write_theta(path: str, rotations) -> None:
    frame = pd.DataFrame({"s": rotations.grid, "theta": theta_lift(rotations)})
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.info("wrote theta profile to %s", path)


def _load_curves(args) -> tuple[Curve, Curve]:
    c1, c2 = parse_curve_spec(args.curve1), parse_curve_spec(args.curve2)
    if c1.n != c2.n:
        raise DimensionMismatch(f"curves live in R^{c1.n} and R^{c2.n}")
    if getattr(args, "theta_csv", None) and c1.n != 2:
        raise DimensionMismatch("--theta-csv needs planar curves")
    return c1, c2


def _should_record(args) -> bool:
    return bool(args.record or args.db)


def _parse_range(text: str, steps: int) -> np.ndarray:
    try:
        a, b = (float(part) for part in text.split(","))
    except ValueError as exc:
        raise InvalidConfig(f"--lambda-range must be 'a,b', got {text!r}") from exc
    if steps < 1:
        raise InvalidConfig(f"--steps must be >= 1, got {steps}")
    if min(a, b) <= 0:
        raise InvalidConfig("lambda_1 must be positive over the whole sweep")
    return np.linspace(a, b, steps)


# ------- commands -------

def cmd_distance(args) -> int:
    cfg = config_from_args(args)
    c1, c2 = _load_curves(args)
    result = distance(c1, c2, cfg)
    if args.theta_csv:
        _write_theta(args.theta_csv, result.path)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "distance",
        "config": cfg.as_dict(),
        "curves": {"curve1": _curve_label(c1), "curve2": _curve_label(c2)},
        **result.as_dict(include_timing=args.timing),
    }
    if _should_record(args):
        runs.init_db(args.db)
        with runs.get_session(args.db) as db:
            run = runs.record_distance(db, result, curve_to_dict(c1), curve_to_dict(c2), cfg.as_dict())
            report["run_id"] = run.id
    _emit_json(report)
    return EXIT_OK


def cmd_solve_bvp(args) -> int:
    cfg = config_from_args(args)
    c1, c2 = _load_curves(args)
    problem = ShootingProblem(
        jet_field(c1, cfg.k, cfg.grid, cfg.weights),
        jet_field(c2, cfg.k, cfg.grid, cfg.weights),
        cfg.scheme,
        cfg.quadrature,
        cfg.kinetic,
    )
    starts = default_starts(problem.n, cfg.starts, cfg.include_reflections, cfg.seed)
    points = solve_bvp_multistart(problem, starts, cfg.tol, cfg.max_iter, cfg.workers, scan=cfg.scan)
    if args.theta_csv:
        _write_theta(args.theta_csv, points[0].path)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "solve-bvp",
        "config": cfg.as_dict(),
        "curves": {"curve1": _curve_label(c1), "curve2": _curve_label(c2)},
        "critical_points": [p.summary() for p in points],
    }
    if _should_record(args):
        runs.init_db(args.db)
        with runs.get_session(args.db) as db:
            run = runs.record_solve(db, points, curve_to_dict(c1), curve_to_dict(c2), cfg.as_dict())
            report["run_id"] = run.id
    _emit_json(report)
    return EXIT_OK


def _shoot_all(problem: ShootingProblem, cfg: RunConfig, starts: list, scan: int) -> list[CriticalPoint]:
    try:
        return solve_bvp_multistart(problem, starts, cfg.tol, cfg.max_iter, cfg.workers, scan=scan)
    except SolverError as exc:
        logger.warning("lambda_1 = %g: %s", cfg.weights[0], exc)
        return []


def _seeds(points: list[CriticalPoint]) -> list[np.ndarray]:
    return [p.path.rotations[0] for p in points]


def continue_branches(
    c1: Curve, c2: Curve, cfg: RunConfig, lams: np.ndarray
) -> tuple[list[RunConfig], list[ShootingProblem], list[list[CriticalPoint]]]:
    """Critical points at every lambda_1, each branch continued up and then down the sweep.

    The upward pass shoots from the default starts, the scan roots and every
    branch of the previous row; the downward pass shoots from every branch of
    the next row.  Each row keeps its distinct points sorted by energy.
    """
    configs = [replace(cfg, weights=(float(lam),) + cfg.weights[1:]) for lam in lams]
    problems = [
        ShootingProblem(
            jet_field(c1, c.k, c.grid, c.weights),
            jet_field(c2, c.k, c.grid, c.weights),
            c.scheme,
            c.quadrature,
            c.kinetic,
        )
        for c in configs
    ]
    branches: list[list[CriticalPoint]] = []
    for problem, cfg_l in zip(problems, configs):
        starts = default_starts(problem.n, cfg_l.starts, cfg_l.include_reflections, cfg_l.seed)
        if branches:
            starts += _seeds(branches[-1])
        branches.append(_shoot_all(problem, cfg_l, starts, cfg_l.scan))
    for i in range(len(configs) - 2, -1, -1):
        seeds = _seeds(branches[i + 1])
        if not seeds:
            continue
        merged = branches[i] + _shoot_all(problems[i], configs[i], seeds, 0)
        merged.sort(key=lambda p: (p.energy.total, p.start_index))
        branches[i] = dedup_critical_points(merged, DEDUP_TOL)
    return configs, problems, branches


def sweep_rows(c1: Curve, c2: Curve, cfg: RunConfig, lams: np.ndarray, method: str = "shooting") -> pd.DataFrame:
    """One row per lambda_1 with the lowest energy over every continued branch."""
    configs, problems, branches = continue_branches(c1, c2, cfg, lams)
    rows = []
    for lam, cfg_l, problem, points in zip(lams, configs, problems, branches):
        try:
            if method == "distance":
                result = distance_between_jets(problem.jets1, problem.jets2, cfg_l, extra_starts=_seeds(points))
                energy, winding, count = result.value, result.winding, len(result.critical_points)
            elif points:
                energy, winding, count = points[0].energy.total, points[0].winding, len(points)
            else:
                raise AllStartsFailed([f"no branch reached lambda_1 = {lam:g}"])
        except SolverError as exc:
            logger.warning("lambda_1 = %g failed: %s", lam, exc)
            rows.append({"lambda": float(lam), "energy_best": np.nan, "winding": None,
                         "branch_count": 0, "status": "failed"})
            continue
        rows.append({"lambda": float(lam), "energy_best": energy, "winding": winding,
                     "branch_count": count, "status": "ok"})
        logger.info("lambda_1 = %g: E = %.10g, winding %s, %d branches", lam, energy, winding, count)
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    return frame.astype({"winding": "Int64", "branch_count": "Int64"})


def _sweep_record(row: dict) -> dict:
    return {
        "lambda": float(row["lambda"]),
        "energy_best": None if pd.isna(row["energy_best"]) else float(row["energy_best"]),
        "winding": None if pd.isna(row["winding"]) else int(row["winding"]),
        "branch_count": int(row["branch_count"]),
        "status": str(row["status"]),
    }


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    lams = _parse_range(args.lambda_range, args.steps)
    c1, c2 = _load_curves(args)
    frame = sweep_rows(c1, c2, cfg, lams, args.method)
    if args.out:
        frame.to_csv(args.out, index=False, float_format=CSV_FLOAT_FORMAT)
    if args.json:
        records = [_sweep_record(row) for row in frame.to_dict("records")]
        _emit_json({"schema": SCHEMA_VERSION, "command": "sweep", "config": cfg.as_dict(), "rows": records})
    elif not args.out:
        frame.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT_FORMAT)
    if _should_record(args):
        runs.init_db(args.db)
        with runs.get_session(args.db) as db:
            runs.record_sweep(db, frame, curve_to_dict(c1), curve_to_dict(c2), cfg.as_dict())
    if (frame["status"] == "failed").all():
        return EXIT_SOLVER
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = config_from_args(args)
    results = run_checks(cfg)
    passed = all(r.passed for r in results)
    _emit_json({
        "schema": SCHEMA_VERSION,
        "command": "check",
        "seed": cfg.seed,
        "checks": [r.as_dict() for r in results],
        "passed": passed,
    })
    return EXIT_OK if passed else EXIT_CHECK


# ------- entry point -------

def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors count as bad input; --help exits 0
        return EXIT_INPUT if exc.code else EXIT_OK
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CurveDistanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
