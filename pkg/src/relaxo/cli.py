"""Command-line front end: ``relaxo {solve,compare,equivalence}``.

Exit codes: 0 success, 1 non-convergence (or a failed equivalence check),
2 I/O or parse failure, 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time

import numpy as np

from relaxo.discrete_gradient import QuadraticObjective, verify_equivalence
from relaxo.problems import omega_opt, ones_rhs, poisson_matrix, poisson_rhs, random_spd
from relaxo.solvers import SolverConfig, best_omega, omega_sweep, solve
from relaxo.sparse import MatrixMarketError, read_matrix_market
from relaxo.traces import trace_to_csv, trace_to_json

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_IO, EXIT_CONFIG = 0, 1, 2, 3
EQUIVALENCE_TOL = 1e-10

METHOD_ALIASES = {
    "fixed-sor": "fixed-sor",
    "sor": "fixed-sor",
    "gauss-seidel": "fixed-sor",
    "adaptive-sd": "adaptive-sd",
    "adaptive-armijo": "adaptive-armijo",
    "adaptive-wolfe": "adaptive-wolfe",
}

_OVERRIDES = {
    "c1": "c1", "c2": "c2", "lambda1": "lambda1", "lambda2": "lambda2", "rho1": "rho1",
    "eps_omega": "eps_omega", "max_omega": "M_omega", "tol": "tol", "max_iter": "max_iter",
}


class UsageError(Exception):
    """Invalid configuration; maps to exit code 3."""


class InputError(Exception):
    """Unreadable or unparsable input; maps to exit code 2."""


def _problem_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", metavar="PATH", help="Matrix Market file (symmetric positive definite)")
    src.add_argument("--poisson", metavar="N", type=int, help="2-D Poisson model problem on an N x N mesh")
    p.add_argument("--rhs", choices=("ones", "poisson"),
                   help="right-hand side (default: poisson for --poisson, ones otherwise)")


def _solver_args(p):
    p.add_argument("--method", action="append", default=None,
                   help="method name, repeatable: " + ", ".join(METHOD_ALIASES))
    p.add_argument("--omega", default=None,
                   help="relaxation parameter for fixed-sor, or 'opt' for the Poisson optimum")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    for name in ("c1", "c2", "lambda1", "lambda2", "rho1"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--eps-omega", type=float)
    p.add_argument("--max-omega", type=float)


def _output_args(p):
    p.add_argument("--out", metavar="DIR", help="directory for trace and summary files")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaxo", description="Adaptive SOR solvers for SPD systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one or more methods on a problem")
    _problem_args(p)
    _solver_args(p)
    _output_args(p)

    p = sub.add_parser("compare", help="fixed-omega grid search, optionally beside adaptive methods")
    _problem_args(p)
    _solver_args(p)
    p.add_argument("--omega-grid", default=None,
                   help="comma-separated omegas (default 0.1,0.2,...,1.9)")
    _output_args(p)

    p = sub.add_parser("equivalence", help="check SOR against the discrete-gradient scheme")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--n", type=int, help="size of a random unit-diagonal SPD system")
    src.add_argument("--poisson", metavar="N", type=int)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


# -- helpers -----------------------------------------------------------------


def _load_problem(args):
    if args.poisson is not None:
        if args.poisson < 2:
            raise UsageError("--poisson needs N >= 2")
        A = poisson_matrix(args.poisson)
    else:
        try:
            A = read_matrix_market(args.matrix)
        except OSError as exc:
            raise InputError(f"cannot read {args.matrix}: {exc.strerror or exc}") from exc
        except MatrixMarketError as exc:
            raise InputError(f"cannot parse {args.matrix}: {exc}") from exc
    rhs = args.rhs or ("poisson" if args.poisson is not None else "ones")
    if rhs == "poisson":
        if args.poisson is None:
            raise UsageError("--rhs poisson requires --poisson")
        b = poisson_rhs(args.poisson)
    else:
        b = ones_rhs(A.n)
    return A, b


def _base_config(args) -> SolverConfig:
    overrides = {}
    for opt, name in _OVERRIDES.items():
        val = getattr(args, opt, None)
        if val is not None:
            overrides[name] = val
    try:
        return SolverConfig(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _resolve_omega(args):
    if args.omega is None:
        return None
    if args.omega == "opt":
        if args.poisson is None:
            raise UsageError("--omega opt is only defined for --poisson problems")
        return omega_opt(args.poisson)
    try:
        return float(args.omega)
    except ValueError as exc:
        raise UsageError(f"invalid --omega {args.omega!r}") from exc


def _method_configs(args, base, default=("adaptive-wolfe",)):
    names = args.method if args.method else list(default)
    omega = _resolve_omega(args)
    runs = []
    for name in names:
        method = METHOD_ALIASES.get(name)
        if method is None:
            raise UsageError(f"unknown method {name!r}")
        kw = {"method": method}
        if name == "gauss-seidel":
            kw["omega"] = 1.0
        elif method == "fixed-sor" and omega is not None:
            kw["omega"] = omega
        try:
            cfg = base.with_overrides(**kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        label = method if method != "fixed-sor" else f"fixed-sor-w{cfg.omega:.4f}"
        runs.append((label, cfg))
    seen = {}
    labelled = []
    for label, cfg in runs:
        seen[label] = seen.get(label, 0) + 1
        labelled.append((label if seen[label] == 1 else f"{label}-{seen[label]}", cfg))
    return labelled


def _run_methods(A, b, runs):
    results = []
    for label, cfg in runs:
        t0 = time.perf_counter()
        rep = solve(A, b, cfg)
        results.append((label, cfg, rep, time.perf_counter() - t0))
    return results


def _prepare_outdir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    if not os.access(path, os.W_OK):
        raise InputError(f"output directory {path} is not writable")


def _write(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _stamp(args):
    if args.no_timestamp:
        return None
    now = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0)
    return f"generated {now.isoformat()}"


def _summary_rows(results):
    return [
        {
            "method": label,
            "omega": cfg.omega if cfg.method == "fixed-sor" else None,
            "converged": rep.converged,
            "iterations": rep.iterations,
            "matvecs": rep.matvecs,
            "rel_residual": rep.rel_residual,
            "wall_time": wall,
        }
        for label, cfg, rep, wall in results
    ]


def _summary_csv(rows, comment):
    cols = ["method", "omega", "converged", "iterations", "matvecs", "rel_residual", "wall_time"]
    lines = [f"# {comment}"] if comment else []
    lines.append(",".join(cols))
    for row in rows:
        omega = "" if row["omega"] is None else "%.16e" % row["omega"]
        lines.append(",".join([
            row["method"], omega, str(int(row["converged"])), str(row["iterations"]),
            str(row["matvecs"]), "%.16e" % row["rel_residual"], "%.6f" % row["wall_time"],
        ]))
    return "\n".join(lines) + "\n"


def _write_results(args, results, extra=None):
    if not args.out:
        return
    stamp = _stamp(args)
    for label, cfg, rep, _ in results:
        if args.format == "csv":
            _write(os.path.join(args.out, f"{label}.csv"), trace_to_csv(rep.trace, stamp))
        else:
            meta = {"method": cfg.method, "converged": rep.converged, "iterations": rep.iterations}
            if stamp:
                meta["comment"] = stamp
            _write(os.path.join(args.out, f"{label}.json"), trace_to_json(rep.trace, **meta))
    rows = _summary_rows(results)
    if args.format == "csv":
        _write(os.path.join(args.out, "summary.csv"), _summary_csv(rows, stamp))
    else:
        payload = {"runs": rows}
        if extra:
            payload.update(extra)
        _write(os.path.join(args.out, "summary.json"), json.dumps(payload, indent=1))


def _print_summary(results, stream):
    print(f"{'method':<24}{'converged':>10}{'iters':>9}{'matvecs':>9}{'rel_res':>12}{'time[s]':>10}",
          file=stream)
    for label, _, rep, wall in results:
        print(f"{label:<24}{str(rep.converged):>10}{rep.iterations:>9}{rep.matvecs:>9}"
              f"{rep.rel_residual:>12.3e}{wall:>10.3f}", file=stream)


# -- subcommands -------------------------------------------------------------


def cmd_solve(args, stream=None) -> int:
    stream = stream or sys.stdout
    base = _base_config(args)
    runs = _method_configs(args, base)
    A, b = _load_problem(args)
    if args.out:
        _prepare_outdir(args.out)
    results = _run_methods(A, b, runs)
    _write_results(args, results)
    _print_summary(results, stream)
    return EXIT_OK if all(rep.converged for _, _, rep, _ in results) else EXIT_NOT_CONVERGED


def _parse_grid(text):
    if text is None:
        return [round(0.1 * i, 10) for i in range(1, 20)]
    try:
        grid = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"invalid --omega-grid {text!r}") from exc
    if not grid or any(not 0.0 < w < 2.0 for w in grid):
        raise UsageError("--omega-grid values must lie in (0, 2)")
    return grid


def cmd_compare(args, stream=None) -> int:
    stream = stream or sys.stdout
    base = _base_config(args)
    grid = _parse_grid(args.omega_grid)
    runs = _method_configs(args, base, default=()) if args.method else []
    A, b = _load_problem(args)
    if args.out:
        _prepare_outdir(args.out)

    table = omega_sweep(A, b, grid, base)
    best = best_omega(table)
    results = _run_methods(A, b, runs)

    print(f"{'omega':>8}{'iters':>9}{'converged':>11}", file=stream)
    for w, its, ok in table:
        print(f"{w:>8.4f}{its:>9}{str(ok):>11}", file=stream)
    if best is None:
        print("best omega: none converged", file=stream)
    else:
        print(f"best omega: {best[0]:.4f} ({best[1]} iterations)", file=stream)
    if args.poisson is not None:
        print(f"omega_opt: {omega_opt(args.poisson):.6f}", file=stream)
    if results:
        _print_summary(results, stream)

    if args.out:
        stamp = _stamp(args)
        if args.format == "csv":
            lines = [f"# {stamp}"] if stamp else []
            lines.append("omega,iterations,converged")
            lines += ["%.16e,%d,%d" % (w, its, ok) for w, its, ok in table]
            _write(os.path.join(args.out, "omega_sweep.csv"), "\n".join(lines) + "\n")
        extra = {
            "omega_sweep": [{"omega": w, "iterations": its, "converged": ok} for w, its, ok in table],
            "best_omega": None if best is None else best[0],
        }
        _write_results(args, results, extra)
        if args.format == "json" and not results:
            _write(os.path.join(args.out, "summary.json"), json.dumps({"runs": [], **extra}, indent=1))

    ok = best is not None and all(rep.converged for _, _, rep, _ in results)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_equivalence(args, stream=None) -> int:
    stream = stream or sys.stdout
    if not 0.0 < args.omega < 2.0:
        raise UsageError(f"omega must lie in (0, 2), got {args.omega}")
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    rng = np.random.default_rng(args.seed)
    if args.poisson is not None:
        if args.poisson < 2:
            raise UsageError("--poisson needs N >= 2")
        A, b = poisson_matrix(args.poisson), poisson_rhs(args.poisson)
    else:
        if args.n < 1:
            raise UsageError("--n must be positive")
        A, b = random_spd(args.n, rng), rng.standard_normal(args.n)
    x0 = rng.standard_normal(A.n)
    dev = verify_equivalence(QuadraticObjective(A, b), x0, args.omega, args.steps)
    print(f"max deviation: {dev:.3e} (threshold {EQUIVALENCE_TOL:.0e})", file=stream)
    return EXIT_OK if dev <= EQUIVALENCE_TOL else EXIT_NOT_CONVERGED


COMMANDS = {"solve": cmd_solve, "compare": cmd_compare, "equivalence": cmd_equivalence}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; report it as a configuration error
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"relaxo: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"relaxo: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
