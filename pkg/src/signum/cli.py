"""Command-line entry point: ``signum sign|sqrt|are|gen|bench``.

Exit status is 0 when the iteration converged, 2 when the solver failed
(no convergence, divergence, a singular matrix, a failed consistency
check) and 1 for usage or file errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path
from typing import List, Optional

from . import bench as bench_mod
from .applications import AreProblem, are_solve, sqrt_via_sign
from .errors import ConsistencyError, MatrixMarketError, SignumError, SingularMatrix, SolverFailure
from .matgen import FAMILIES, GenSpec
from .mmio import read_matrix_market, write_matrix_market
from .sign import METHODS, IterationConfig, SignResult, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2

_NORMS = {"fro": "frobenius", "one": "one"}
_PRESCALE = {"auto": None, "on": True, "off": False}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; that code is reserved
    # for solver failures here
    def error(self, message):
        raise UsageError(message)


def _add_solver_flags(p, default_method="nmf", default_tol=1e-12):
    p.add_argument("--method", choices=METHODS, default=default_method)
    p.add_argument("--tol", type=float, default=default_tol, help="eps_tol on ||I - X^2||")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--norm", choices=sorted(_NORMS), default="fro")
    p.add_argument("--prescale", choices=sorted(_PRESCALE), default="auto")
    p.add_argument("--trace", type=Path, help="write the per-iteration trace CSV here")
    p.add_argument("--json", action="store_true", help="print a JSON summary to stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sign", help="sign of a Matrix Market matrix")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, help="write sign(A) here")
    _add_solver_flags(p)

    p = sub.add_parser("sqrt", help="B^(1/2) and B^(-1/2) through the sign embedding")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, help="write B^(1/2) here")
    p.add_argument("--out-inv", type=Path, help="write B^(-1/2) here")
    _add_solver_flags(p)

    p = sub.add_parser("are", help="continuous-time algebraic Riccati equation")
    for name in "bcdq":
        p.add_argument(f"--{name}", type=Path, help=f"{name.upper()} block (.mtx)")
    p.add_argument("--gen-are", nargs=2, type=int, metavar=("N", "SEED"),
                   help="use the generated banded test problem instead of files")
    p.add_argument("--out", type=Path, help="write U here")
    _add_solver_flags(p, default_tol=1e-14)

    p = sub.add_parser("gen", help="write a generated matrix")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("n", type=int, nargs="?")
    p.add_argument("--density", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raw", action="store_true", help="rand_sparse without the diagonal shift")
    p.add_argument("--k", type=int, default=1, help="network: lattice neighbours per side")
    p.add_argument("--p", type=float, default=0.0, help="network: rewiring probability")
    p.add_argument("--spec", type=Path, help="read a GenSpec JSON job file instead")
    p.add_argument("--out", type=Path, required=True,
                   help="output .mtx (are_pair: prefix for _B/_C/_D/_Q files)")

    p = sub.add_parser("bench", help="run a benchmark suite and print CSV")
    p.add_argument("suite", choices=("table421", "table431", "network", "kernels"))
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--out", type=Path, help="write CSV here instead of stdout")
    return parser


def _config(args) -> IterationConfig:
    return IterationConfig(method=args.method, eps_tol=args.tol, max_iter=args.max_iter,
                           norm_kind=_NORMS[args.norm], prescale=_PRESCALE[args.prescale])


def _summary(method, n, res: Optional[SignResult], wall, error=None):
    out = {
        "method": method,
        "n": n,
        "converged": bool(res.converged) if res else False,
        "iterations": res.iterations if res else 0,
        "final_residual": res.final_residual if res else None,
        "wall_seconds": wall,
    }
    if res is not None:
        out["status"] = res.status
    if error is not None:
        out["error"] = type(error).__name__
        out["message"] = str(error)
    return out


def _finish(args, summary, res):
    if getattr(args, "trace", None) and res is not None:
        args.trace.write_text(bench_mod.trace_to_csv(res))
    if args.json:
        print(json.dumps(summary))
    elif summary.get("error"):
        print(f"signum: {summary['error']}: {summary['message']}", file=sys.stderr)
    else:
        print(f"{summary['method']}: status={summary.get('status')} "
              f"iterations={summary['iterations']} residual={summary['final_residual']:.3e} "
              f"wall={summary['wall_seconds']:.3f}s", file=sys.stderr)
    return EXIT_OK if summary["converged"] else EXIT_SOLVER


def _solve(args, n, fn):
    """Run ``fn()`` and map solver exceptions onto a summary."""
    t0 = time.perf_counter()
    res, error, payload = None, None, None
    try:
        payload, res = fn()
    except SolverFailure as exc:
        res, error = exc.result, exc
    except (SingularMatrix, ConsistencyError) as exc:
        error = exc
    wall = time.perf_counter() - t0
    summary = _summary(args.method, n, res, wall, error)
    if error is not None:
        summary["converged"] = False
    return summary, res, payload


def cmd_sign(args):
    a = read_matrix_market(args.input)

    def go():
        r = run(a, _config(args))
        return r.sign, r

    summary, res, sgn = _solve(args, a.nrows, go)
    if args.out and sgn is not None:
        write_matrix_market(sgn, args.out)
    return _finish(args, summary, res)


def cmd_sqrt(args):
    b = read_matrix_market(args.input)

    def go():
        root, inv_root, r = sqrt_via_sign(b, _config(args), return_result=True)
        return (root, inv_root), r

    summary, res, roots = _solve(args, b.nrows, go)
    if roots is not None:
        if args.out:
            write_matrix_market(roots[0], args.out)
        if args.out_inv:
            write_matrix_market(roots[1], args.out_inv)
    return _finish(args, summary, res)


def cmd_are(args):
    if args.gen_are:
        from .matgen import gen_are_pair
        n, seed = args.gen_are
        problem = gen_are_pair(n, seed)
    else:
        missing = [x for x in "bcdq" if getattr(args, x) is None]
        if missing:
            raise UsageError("are needs --b --c --d --q or --gen-are N SEED")
        problem = AreProblem(*(read_matrix_market(getattr(args, x)) for x in "bcdq"))

    def go():
        sol = are_solve(problem, _config(args))
        return sol, sol.sign_result

    summary, res, sol = _solve(args, problem.n, go)
    if sol is not None:
        summary["equation_error"] = sol.equation_error
        if args.out:
            write_matrix_market(sol.U, args.out)
    return _finish(args, summary, res)


def cmd_gen(args):
    if args.spec:
        spec = GenSpec.from_json(args.spec.read_text())
    else:
        if args.n is None:
            raise UsageError("gen needs n (or --spec)")
        params = {"raw": args.raw} if args.family == "rand_sparse" else {}
        if args.family == "network":
            params = {"k": args.k, "p": args.p}
        spec = GenSpec(args.family, args.n, args.density, args.seed, params)
    m = spec.build()
    comment = spec.to_json()
    if isinstance(m, AreProblem):
        for name in "BCDQ":
            write_matrix_market(getattr(m, name), f"{args.out}_{name}.mtx", comment)
    else:
        write_matrix_market(m, args.out, comment)
    return EXIT_OK


def cmd_bench(args):
    if args.suite == "table421":
        rows = bench_mod.bench_table421(args.nmax or 1000)
    elif args.suite == "table431":
        rows = bench_mod.bench_table431(args.nmax or 700)
    elif args.suite == "network":
        sizes = [s for s in (5000, 20000, 50000) if s <= (args.nmax or 50000)]
        rows = bench_mod.bench_network(sizes)
    else:
        timings = bench_mod.bench_kernels(n=args.nmax or 2000)
        text = "kernel,backend,n,nnz,seconds\n" + "".join(
            f"{t.kernel},{t.backend},{t.n},{t.nnz},{t.seconds!r}\n" for t in timings)
        _emit(args, text)
        return EXIT_OK
    _emit(args, bench_mod.rows_to_csv(rows, bench_mod.suite_comments(args.suite, rows)))
    return EXIT_OK if all(r.status == "converged" for r in rows) else EXIT_SOLVER


def _emit(args, text):
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


_COMMANDS = {"sign": cmd_sign, "sqrt": cmd_sqrt, "are": cmd_are, "gen": cmd_gen,
             "bench": cmd_bench}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"signum: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"signum: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MatrixMarketError, ValueError) as exc:
        print(f"signum: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SignumError as exc:
        print(f"signum: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
