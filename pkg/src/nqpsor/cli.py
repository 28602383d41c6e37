"""Batch command-line front end.

Subcommands: ``gen`` writes preset problems to disk, ``solve`` runs one
solver on a preset or on files, ``compare`` scans a relaxation-parameter
grid against the adaptive solvers, and ``denoise`` runs the deblurring
demonstration.  Exit status is 0 iff every requested run converged; a
machine-readable RESULT line summarizes the outcome either way.

Grid-scan runs in ``compare`` are independent and execute on a thread
pool; NQP_SOR_THREADS caps the pool size.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import io as nio
from . import imaging
from .diagnostics import kkt_residual
from .generators import gen_suite
from .model import NnlsProblem, NqpProblem
from .solvers import (
    SolverConfig,
    apsor_freeze_solve,
    apsor_shift_solve,
    apsor_wolfe_solve,
    naive_psor_solve,
    normal_psor_solve,
    psor_solve,
)

_SOLVERS = ("psor", "naive", "apsor", "apsor-freeze", "apsor-shift", "normal")
_OMEGA_SOLVERS = ("psor", "naive")


def _thread_cap():
    raw = os.environ.get("NQP_SOR_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return min(4, os.cpu_count() or 1)


def _out_path(out_dir, name, force):
    path = Path(out_dir) / name
    if path.exists() and not force:
        raise SystemExit(
            f"error: {path} exists; pass --force to overwrite"
        )
    return path


def _ensure_out(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _make_config(args):
    if getattr(args, "config", None):
        cfg = nio.read_solver_config(args.config)
    else:
        cfg = SolverConfig()
    if getattr(args, "tolerance", None) is not None:
        cfg.tolerance = args.tolerance
    if getattr(args, "max_iterations", None) is not None:
        cfg.max_iterations = args.max_iterations
    if getattr(args, "sigma", None) is not None:
        cfg.shift_sigma = args.sigma
    if getattr(args, "freeze_m", None) is not None:
        cfg.freeze_m = args.freeze_m
    cfg.__post_init__()
    return cfg


def _load_problems(args):
    """Problem holders (problem, x_true, y_true, label) from preset or files."""
    if args.preset:
        problems = gen_suite(args.preset, n=args.n, density=args.density,
                             seed=args.seed)
        if getattr(args, "index", None) is not None:
            problems = [problems[args.index]]
        return problems
    if not args.matrix or not args.rhs:
        raise SystemExit("error: provide --preset or both --matrix and --rhs")
    A = nio.read_matrix_market(args.matrix)
    b = nio.read_vector(args.rhs)
    x_true = nio.read_vector(args.x_true) if getattr(args, "x_true", None) else None
    return [SimpleNamespace(problem=NqpProblem(A, b), x_true=x_true,
                            y_true=None, label=Path(args.matrix).stem)]


def cmd_gen(args):
    out = _ensure_out(args)
    problems = gen_suite(args.preset, n=args.n, density=args.density,
                         seed=args.seed)
    for gp in problems:
        prefix = gp.label
        paths = {
            "A": _out_path(out, f"{prefix}_A.mtx", args.force),
            "b": _out_path(out, f"{prefix}_b.txt", args.force),
            "x": _out_path(out, f"{prefix}_xtrue.txt", args.force),
            "y": _out_path(out, f"{prefix}_ytrue.txt", args.force),
        }
        nio.write_matrix_market(paths["A"], gp.problem.A)
        nio.write_vector(paths["b"], gp.problem.b)
        nio.write_vector(paths["x"], gp.x_true)
        nio.write_vector(paths["y"], gp.y_true)
        print(f"wrote {prefix}: n={gp.problem.n} nnz={gp.problem.A.nnz}")
    print(f'RESULT {json.dumps({"problems": len(problems), "out": str(out)})}')
    return 0


def _run_one(problem, solver, omega, cfg):
    t0 = time.perf_counter()
    if solver == "psor":
        result = psor_solve(problem, omega, cfg)
    elif solver == "naive":
        result = naive_psor_solve(problem, omega, cfg)
    elif solver == "apsor":
        result = apsor_wolfe_solve(problem, cfg)
    elif solver == "apsor-freeze":
        result = apsor_freeze_solve(problem, cfg)
    elif solver == "apsor-shift":
        result = apsor_shift_solve(problem, cfg)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    elapsed = time.perf_counter() - t0
    report = kkt_residual(problem, result.x)
    return result, report, elapsed


def cmd_solve(args):
    out = _ensure_out(args)
    if args.solver in _OMEGA_SOLVERS and args.omega is None:
        raise SystemExit(f"error: --omega is required for solver {args.solver}")
    cfg = _make_config(args)
    if args.solver == "normal":
        if not args.nnls_c or not args.nnls_d:
            raise SystemExit(
                "error: solver normal requires --nnls-c and --nnls-d"
            )
        C = nio.read_matrix_market_rect(args.nnls_c)
        d = nio.read_vector(args.nnls_d)
        q = NnlsProblem(C, d)
        mode = args.omega if args.omega is not None else "wolfe"
        t0 = time.perf_counter()
        result = normal_psor_solve(q, mode, cfg)
        elapsed = time.perf_counter() - t0
        residual = float(np.linalg.norm(q.residual(result.x)))
        nio.write_vector(_out_path(out, "x.txt", args.force), result.x)
        if result.trace is not None:
            nio.write_trace_csv(result.trace,
                                _out_path(out, "trace.csv", args.force))
        print(f"status={result.status.value} iterations={result.iterations} "
              f"residual_norm={residual:.6e} seconds={elapsed:.3f}")
        converged = result.converged
        print(f'RESULT {json.dumps({"total": 1, "converged": int(converged)})}')
        return 0 if converged else 1

    runs = []
    for gp in _load_problems(args):
        result, report, elapsed = _run_one(gp.problem, args.solver,
                                           args.omega, cfg)
        prefix = gp.label or "problem"
        nio.write_vector(_out_path(out, f"{prefix}_x.txt", args.force),
                         result.x)
        if result.trace is not None:
            nio.write_trace_csv(
                result.trace,
                _out_path(out, f"{prefix}_trace.csv", args.force),
            )
        line = (f"{prefix}: status={result.status.value} "
                f"iterations={result.iterations} "
                f"kkt_residual={report.residual_norm:.6e} "
                f"seconds={elapsed:.3f}")
        if getattr(gp, "x_true", None) is not None:
            err = np.linalg.norm(result.x - gp.x_true)
            denom = np.linalg.norm(gp.x_true)
            line += f" rel_error={err / denom:.6e}" if denom else ""
        if result.frozen_omega is not None:
            line += f" frozen_omega={result.frozen_omega:.6f}"
        if result.shift_iterations is not None:
            line += f" shift_iterations={result.shift_iterations}"
        print(line)
        runs.append(result)
    converged = sum(r.converged for r in runs)
    print(f'RESULT {json.dumps({"total": len(runs), "converged": converged})}')
    return 0 if converged == len(runs) else 1


def cmd_compare(args):
    out = _ensure_out(args)
    cfg = _make_config(args)
    gp = _load_problems(args)[0]
    problem = gp.problem
    omegas = np.arange(args.grid_step, 2.0, args.grid_step)
    jobs = [("psor", float(w)) for w in np.round(omegas, 10)]
    jobs += [("apsor", None), ("apsor-freeze", None)]

    def run(job):
        solver, omega = job
        return job, _run_one(problem, solver, omega, cfg)

    with ThreadPoolExecutor(max_workers=_thread_cap()) as pool:
        outcomes = list(pool.map(run, jobs))

    rows = []
    for (solver, omega), (result, report, elapsed) in outcomes:
        tag = f"omega{omega:g}" if omega is not None else solver
        if result.trace is not None:
            nio.write_trace_csv(
                result.trace,
                _out_path(out, f"trace_{tag}.csv", args.force),
            )
        rows.append({
            "solver": solver,
            "omega": "" if omega is None else f"{omega:g}",
            "iterations": result.iterations,
            "status": result.status.value,
            "kkt_residual": report.residual_norm,
            "wall_time_s": elapsed,
        })

    summary = _out_path(out, "summary.csv", args.force)
    with open(summary, "w", encoding="ascii") as f:
        f.write("solver,omega,iterations,status,kkt_residual,wall_time_s\n")
        for row in rows:
            f.write(f'{row["solver"]},{row["omega"]},{row["iterations"]},'
                    f'{row["status"]},{row["kkt_residual"]:.17g},'
                    f'{row["wall_time_s"]:.6f}\n')

    fixed_converged = [
        r for r in rows if r["solver"] == "psor" and r["status"] == "converged"
    ]
    if fixed_converged:
        best = min(
            fixed_converged,
            key=lambda r: (r["iterations"], r["kkt_residual"]),
        )
        print(f'best fixed omega={best["omega"]} '
              f'iterations={best["iterations"]}')
    for row in rows:
        if row["solver"] != "psor":
            print(f'{row["solver"]}: iterations={row["iterations"]} '
                  f'status={row["status"]}')
    converged = sum(r["status"] == "converged" for r in rows)
    print(f'RESULT {json.dumps({"total": len(rows), "converged": converged})}')
    return 0 if converged == len(rows) else 1


def cmd_denoise(args):
    out = _ensure_out(args)
    cfg = _make_config(args)
    cfg.record_iterates = args.errors
    if args.synthetic is not None:
        truth = imaging.synthetic_image(args.synthetic)
    elif args.input:
        truth = imaging.read_pgm(args.input)
    else:
        raise SystemExit("error: provide --synthetic SIZE or --input FILE")
    op = imaging.BlurOperator.gaussian(
        truth.shape[1], truth.shape[0], args.blur_sigma
    )
    blurred = np.clip(op.apply(truth), 0.0, 1.0)
    noisy = imaging.add_noise(blurred, args.noise, seed=args.seed)
    mode = "wolfe" if args.mode == "adaptive" else args.omega
    if mode is None:
        raise SystemExit("error: --omega is required with --mode fixed")
    if args.iterations is not None:
        cfg.max_iterations = args.iterations
    restored, result = imaging.deblur_solve(noisy, op, cfg, mode=mode)

    imaging.write_pgm(_out_path(out, "truth.pgm", args.force), truth)
    imaging.write_pgm(_out_path(out, "blurred.pgm", args.force), noisy)
    imaging.write_pgm(_out_path(out, "restored.pgm", args.force), restored)
    if result.trace is not None:
        nio.write_trace_csv(result.trace,
                            _out_path(out, "trace.csv", args.force))
    residual = float(np.linalg.norm(op.apply(restored) - noisy))
    err_in = imaging.relative_error(noisy, truth)
    err_out = imaging.relative_error(restored, truth)
    line = (f"status={result.status.value} iterations={result.iterations} "
            f"residual_norm={residual:.6e} "
            f"input_rel_error={err_in:.6f} output_rel_error={err_out:.6f}")
    if args.errors and result.trace is not None \
            and result.trace.iterates is not None:
        errs = _out_path(out, "errors.csv", args.force)
        with open(errs, "w", encoding="ascii") as f:
            f.write("iter,relative_error\n")
            for k, it in enumerate(result.trace.iterates):
                f.write(f"{k},{imaging.relative_error(it, truth):.17g}\n")
    print(line)
    converged = result.converged
    print(f'RESULT {json.dumps({"total": 1, "converged": int(converged)})}')
    return 0 if converged else 1


def _add_problem_source(parser, with_index=True):
    parser.add_argument("--preset", choices=("toy-spd", "toy-spsd-small",
                                             "toy-spsd-large"))
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--density", type=float, default=None)
    parser.add_argument("--seed", type=int, default=1)
    if with_index:
        parser.add_argument("--index", type=int, default=None,
                            help="pick one problem from the preset")
    parser.add_argument("--matrix", help="Matrix Market symmetric file")
    parser.add_argument("--rhs", help="right-hand-side vector file")
    parser.add_argument("--x-true", dest="x_true",
                        help="known solution vector file (optional)")


def _add_config_flags(parser):
    parser.add_argument("--config", default=None,
                        help="solver parameter JSON file; flags override it")
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int,
                        default=None)
    parser.add_argument("--sigma", type=float, default=None,
                        help="diagonal shift (default: min diag)")
    parser.add_argument("--freeze-m", dest="freeze_m", type=int, default=None)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nqpsor",
        description="Projected SOR solvers for nonnegative and "
                    "box-constrained quadratic programming",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write preset problems to disk")
    p_gen.add_argument("--preset", required=True,
                       choices=("toy-spd", "toy-spsd-small", "toy-spsd-large"))
    p_gen.add_argument("--n", type=int, default=None)
    p_gen.add_argument("--density", type=float, default=None)
    p_gen.add_argument("--seed", type=int, default=1)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--force", action="store_true")
    p_gen.set_defaults(func=cmd_gen)

    p_solve = sub.add_parser("solve", help="run one solver")
    _add_problem_source(p_solve)
    p_solve.add_argument("--solver", required=True, choices=_SOLVERS)
    p_solve.add_argument("--omega", type=float, default=None)
    p_solve.add_argument("--nnls-c", dest="nnls_c",
                         help="rectangular Matrix Market file (solver normal)")
    p_solve.add_argument("--nnls-d", dest="nnls_d",
                         help="data vector file (solver normal)")
    _add_config_flags(p_solve)
    p_solve.add_argument("--out", required=True)
    p_solve.add_argument("--force", action="store_true")
    p_solve.set_defaults(func=cmd_solve)

    p_cmp = sub.add_parser("compare",
                           help="fixed-omega grid versus adaptive solvers")
    _add_problem_source(p_cmp)
    p_cmp.add_argument("--grid-step", dest="grid_step", type=float,
                       default=0.1)
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--force", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_dn = sub.add_parser("denoise", help="deblurring demonstration")
    p_dn.add_argument("--synthetic", type=int, default=None,
                      help="generate an N x N synthetic test image")
    p_dn.add_argument("--input", help="input PGM image")
    p_dn.add_argument("--blur-sigma", dest="blur_sigma", type=float,
                      default=2.0)
    p_dn.add_argument("--noise", type=float, default=0.1)
    p_dn.add_argument("--mode", choices=("adaptive", "fixed"),
                      default="adaptive")
    p_dn.add_argument("--omega", type=float, default=None)
    p_dn.add_argument("--iterations", type=int, default=None,
                      help="iteration cap for the restoration")
    p_dn.add_argument("--seed", type=int, default=0)
    p_dn.add_argument("--errors", action="store_true",
                      help="also write per-iteration relative errors")
    _add_config_flags(p_dn)
    p_dn.add_argument("--out", required=True)
    p_dn.add_argument("--force", action="store_true")
    p_dn.set_defaults(func=cmd_denoise)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
