"""Command-line entry point.

Subcommands: solve-discrete, solve-soft, solve-ground, oracle
(enumerate | eig), compare.  Every run writes ``result.json`` plus CSV
artifacts and rendered figures into the output directory (``--out``,
default ``./out``).  Exit codes: 0 success, 1 solver non-convergence,
2 input error.  The COOPT_THREADS environment variable caps worker
parallelism during grid stepping.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import continuous, discrete, oracle, plots, problems, reporting, soft
from .model import CooptError, ProblemFormatError


def _grid_spec(text: str) -> continuous.Grid1D:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"grid must be MIN:MAX:N, got {text!r}"
        )
    try:
        x_min, x_max, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be MIN:MAX:N with numeric fields, got {text!r}"
        ) from None
    try:
        return continuous.Grid1D(x_min, x_max, n)
    except CooptError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(
            f"expected key=value, got {text!r}"
        )
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"parameter {key!r} needs a numeric value, got {value!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopt",
        description="Cooperative-optimization solvers and oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-discrete", help="min-sum bound iteration")
    p.add_argument("problem", help="discrete problem JSON")
    p.add_argument("--variant", choices=discrete.VARIANTS, default="pairwise")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="./out")

    p = sub.add_parser("solve-soft", help="soft-assignment iteration")
    p.add_argument("problem", help="discrete problem JSON")
    p.add_argument("--mode", choices=("maxprod", "sumprod"), default="sumprod")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--out", default="./out")

    p = sub.add_parser("solve-ground", help="grid ground-state relaxation")
    p.add_argument("problem", help="continuous problem JSON")
    p.add_argument("--grid", type=_grid_spec, required=True,
                   metavar="MIN:MAX:N")
    p.add_argument("--hbar", type=float, default=None,
                   help="override the problem file's hbar")
    p.add_argument("--dt", type=float, default=None,
                   help="time step (default: stability-derived)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--integrator", choices=("kernel", "euler"),
                   default="kernel")
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--out", default="./out")

    po = sub.add_parser("oracle", help="independent reference computations")
    osub = po.add_subparsers(dest="oracle_command", required=True)

    p = osub.add_parser("enumerate", help="exhaustive discrete optimum")
    p.add_argument("problem", help="discrete problem JSON")
    p.add_argument("--out", default="./out")

    p = osub.add_parser("eig", help="ground eigenpair of a named potential")
    p.add_argument("--grid", type=_grid_spec, required=True,
                   metavar="MIN:MAX:N")
    p.add_argument("--potential", choices=sorted(problems.UNARY_POTENTIALS),
                   default="harmonic")
    p.add_argument("--m", type=float, default=1.0, help="particle mass")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--param", type=_param, action="append", default=[],
                   metavar="KEY=VALUE", help="potential parameter override")
    p.add_argument("--out", default="./out")

    p = sub.add_parser("compare", help="deltas between two report files")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out", default="./out")

    return parser


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(out: Path, payload: dict, started: float) -> None:
    payload["wall_time_s"] = time.perf_counter() - started
    reporting.write_json(out / "result.json", payload)
    print(f"wrote {out / 'result.json'}")


def _run_solve_discrete(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    model, names = problems.load_discrete_problem(args.problem)
    config = discrete.CoopConfig(lam=args.lam, alpha=args.alpha,
                                 tol=args.tol, max_iters=args.max_iters)
    report = discrete.solve_discrete(model, config, variant=args.variant)
    cert = report.certificate
    labels = [model.domains[i].values[k]
              for i, k in enumerate(cert.assignment)]
    reporting.write_csv(out / "trace.csv",
                        ["iter", "lower_bound", "upper_bound", "delta"],
                        report.trace)
    plots.plot_bounds(report.trace, out / "bounds.png")
    payload = {
        "kind": "solve-discrete",
        "config": {
            "problem": str(args.problem), "variant": args.variant,
            "lambda": args.lam, "alpha": args.alpha, "tol": args.tol,
            "max_iters": args.max_iters, "seed": args.seed,
        },
        "variables": names,
        "converged": report.converged,
        "iterations": report.iterations,
        "assignment": list(cert.assignment),
        "assignment_labels": labels,
        "certificate": {
            "lower_bound": cert.lower_bound,
            "upper_bound": cert.upper_bound,
            "certified": cert.certified,
            "eps": cert.eps,
        },
    }
    _finish(out, payload, started)
    return 0 if report.converged else 1


def _run_solve_soft(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    model, names = problems.load_discrete_problem(args.problem)
    report = soft.solve_soft(model, mode=args.mode, hbar=args.hbar,
                             alpha=args.alpha, tol=args.tol,
                             max_iters=args.max_iters)
    decision = report.decision
    labels = [model.domains[i].values[k] for i, k in enumerate(decision)]
    psi_rows = []
    for i, table in enumerate(report.soft.tables):
        for k, value in enumerate(table):
            psi_rows.append([names[i], model.domains[i].values[k], value])
    reporting.write_csv(out / "psi.csv", ["variable", "label", "psi"],
                        psi_rows)
    reporting.write_csv(out / "trace.csv", ["iter", "delta"], report.trace)
    plots.plot_tables(report.soft.tables, names, out / "psi.png")
    payload = {
        "kind": "solve-soft",
        "config": {
            "problem": str(args.problem), "mode": args.mode,
            "hbar": args.hbar, "alpha": args.alpha, "tol": args.tol,
            "max_iters": args.max_iters,
        },
        "variables": names,
        "converged": report.converged,
        "iterations": report.iterations,
        "decision": list(decision),
        "decision_labels": labels,
        "psi_tables": [t for t in report.soft.tables],
    }
    _finish(out, payload, started)
    return 0 if report.converged else 1


def _run_solve_ground(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    problem, names = problems.load_continuous_problem(args.problem)
    grid = args.grid
    hbar = problem.hbar if args.hbar is None else args.hbar
    dt = args.dt
    if dt is None:
        sigmas = continuous.default_sigmas(problem, hbar)
        dt = continuous.default_dt(problem, grid, hbar, args.integrator, sigmas)
    field, result = continuous.solve_ground(
        problem, grid, dt=dt, hbar=hbar, tol=args.tol,
        max_iters=args.max_iters, integrator=args.integrator)
    xs = grid.xs
    rows = []
    for i in range(problem.n):
        for k in range(grid.n):
            rows.append([names[i], xs[k], field.psi[i, k]])
    reporting.write_csv(out / "wavefunction.csv",
                        ["particle", "x", "psi"], rows)
    plots.plot_fields(xs, field.psi, names, out / "wavefunction.png")
    payload = {
        "kind": "solve-ground",
        "config": {
            "problem": str(args.problem),
            "grid": f"{grid.x_min}:{grid.x_max}:{grid.n}",
            "hbar": hbar, "dt": dt, "tol": args.tol,
            "integrator": args.integrator, "max_iters": args.max_iters,
        },
        "particles": names,
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max,
                 "n": grid.n, "h": grid.h},
        "converged": result.converged,
        "iterations": result.iterations,
        "energies": list(result.energies),
        "residuals": list(result.residuals),
        "fields": [row for row in field.psi],
    }
    _finish(out, payload, started)
    return 0 if result.converged else 1


def _run_oracle_enumerate(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    model, names = problems.load_discrete_problem(args.problem)
    result = oracle.enumerate_model(model)
    labels = [model.domains[i].values[k]
              for i, k in enumerate(result.assignment)]
    payload = {
        "kind": "oracle-enumerate",
        "config": {"problem": str(args.problem)},
        "variables": names,
        "optimal_assignment": list(result.assignment),
        "optimal_assignment_labels": labels,
        "optimal_energy": result.energy,
        "visited": result.visited,
    }
    _finish(out, payload, started)
    return 0


def _run_oracle_eig(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    params = dict(args.param)
    if args.potential == "harmonic":
        params.setdefault("m", args.m)
    fn = problems.build_potential_fn(
        {"type": args.potential, **params}, "--potential")
    grid = args.grid
    result = oracle.ground_eig(fn(grid.xs), grid, args.m, args.hbar)
    reporting.write_csv(out / "wavefunction.csv", ["particle", "x", "psi"],
                        [["0", x, v] for x, v in zip(grid.xs, result.vector)])
    plots.plot_fields(grid.xs, result.vector[None, :], ["ground state"],
                      out / "wavefunction.png")
    payload = {
        "kind": "oracle-eig",
        "config": {"potential": args.potential, "params": params,
                   "m": args.m, "hbar": args.hbar,
                   "grid": f"{grid.x_min}:{grid.x_max}:{grid.n}"},
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max,
                 "n": grid.n, "h": grid.h},
        "eigenvalue": result.value,
        "eigenvector": list(result.vector),
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    _finish(out, payload, started)
    return 0 if result.converged else 1


def _run_compare(args) -> int:
    out = _out_dir(args)
    doc_a = reporting.read_json(args.report_a)
    doc_b = reporting.read_json(args.report_b)
    comparison = compare(doc_a, doc_b)
    reporting.write_json(out / "compare.json", comparison)
    for key, value in sorted(comparison.items()):
        print(f"{key}: {value}")
    return 0


def compare(report_a: dict, report_b: dict) -> dict:
    """Comparison JSON for two report documents (or oracle output)."""
    return reporting.compare_reports(report_a, report_b)


_RUNNERS = {
    "solve-discrete": _run_solve_discrete,
    "solve-soft": _run_solve_soft,
    "solve-ground": _run_solve_ground,
    "compare": _run_compare,
}


def _join_grid_value(argv):
    """Fold ``--grid -8:8:201`` into ``--grid=-8:8:201`` so argparse does not
    mistake a negative MIN for an option flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv):
            out.append(f"--grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(_join_grid_value(list(argv)))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "oracle":
        runner = (_run_oracle_enumerate if args.oracle_command == "enumerate"
                  else _run_oracle_eig)
    else:
        runner = _RUNNERS[args.command]
    try:
        return runner(args)
    except ProblemFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except continuous.StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CooptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
