"""Benchmark harness: the dispersion square-root table, the Riccati table,
the synthetic network sweep and a kernel backend comparison.

Timings are wall-clock seconds on whatever machine runs them; only ratios
between methods are meant to be compared across machines.
"""
from __future__ import annotations

import csv
import io
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import _backend
from .applications import AreSolution, are_solve
from .errors import NsPreconditionWarning
from .matgen import (gen_are_pair, gen_dispersion, gen_network_sign_input, gen_rand_sparse,
                     gen_small_world_edges, sqrt_embedding)
from .sign import IterationConfig, SignResult, run
from .sparse import SparseMatrix, add, identity, norm

TRACE_HEADER = ("k", "residual", "nnz", "threshold", "dropped_norm", "dropped_count",
                "step_seconds")
ROW_HEADER = ("method", "n", "et_seconds", "ae", "final_residual", "ee", "iterations", "status")

TABLE421_SIZES = (500, 1000, 3000)
TABLE421_TOL = 1e-12
TABLE431_SIZES = (500, 600, 700)
TABLE431_TOL = 1e-14
NETWORK_TOL = 1e-13
METHODS = ("nm", "nmf", "ns", "nsf")
TWINS = {"nmf": "nm", "nsf": "ns"}


def table431_seed(n: int) -> int:
    """Seed of the random SPD block ``D`` for the Riccati row of size ``n``."""
    return 431_000 + n


@dataclass
class BenchRow:
    """One (method, n) measurement.

    ``ae`` is the Frobenius distance to the unfiltered twin and is set for
    filtered methods only; ``ee`` is the Riccati equation error and is set
    for Riccati rows only.  ``result`` keeps the full run and ``solution``
    the Riccati solution; neither is serialized.
    """

    method: str
    n: int
    et_seconds: float
    final_residual: float
    iterations: int
    status: str
    ae: Optional[float] = None
    ee: Optional[float] = None
    result: Optional[SignResult] = field(default=None, repr=False, compare=False)
    solution: Optional[AreSolution] = field(default=None, repr=False, compare=False)

    def as_record(self):
        return {k: getattr(self, k) for k in ROW_HEADER}


def _timed_run(a, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NsPreconditionWarning)
        t0 = time.perf_counter()
        res = run(a, cfg)
        return res, time.perf_counter() - t0


def _fill_ae(rows: List[BenchRow]):
    by_key = {(r.method, r.n): r for r in rows}
    for r in rows:
        twin = by_key.get((TWINS.get(r.method), r.n))
        if twin is not None and r.result is not None and twin.result is not None:
            r.ae = norm(add(r.result.sign, twin.result.sign, 1.0, -1.0), "frobenius")


def bench_table421(nmax: int = 1000, methods: Sequence[str] = METHODS,
                   sizes: Iterable[int] = TABLE421_SIZES) -> List[BenchRow]:
    """Square root of the dispersion matrix via ``sign([[0, B], [I, 0]])``.

    ``n`` is the size of ``B``; the iterated matrix is ``2n x 2n``.
    """
    if nmax < 500:
        raise ValueError("table421 needs nmax >= 500")
    rows = []
    for n in (s for s in sizes if s <= nmax):
        a = sqrt_embedding(gen_dispersion(n))
        for m in methods:
            res, dt = _timed_run(a, IterationConfig(method=m, eps_tol=TABLE421_TOL))
            rows.append(BenchRow(m, n, dt, res.final_residual, res.iterations, res.status,
                                 result=res))
    _fill_ae(rows)
    return rows


def bench_table431(nmax: int = 700, methods: Sequence[str] = METHODS,
                   sizes: Iterable[int] = TABLE431_SIZES) -> List[BenchRow]:
    """Riccati problems with banded ``B``, ``C`` and a seeded SPD ``D``.

    ``et_seconds`` covers the whole solve: sign iteration, block extraction
    and the ``W12`` solve.
    """
    rows = []
    for n in (s for s in sizes if 5 <= s <= nmax):
        p = gen_are_pair(n, table431_seed(n))
        for m in methods:
            cfg = IterationConfig(method=m, eps_tol=TABLE431_TOL)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NsPreconditionWarning)
                t0 = time.perf_counter()
                sol = are_solve(p, cfg)
                dt = time.perf_counter() - t0
            res = sol.sign_result
            rows.append(BenchRow(m, n, dt, res.final_residual, res.iterations, res.status,
                                 ee=sol.equation_error, result=res, solution=sol))
    _fill_ae(rows)
    return rows


def network_matrix(n: int, seed: int = 0, k: int = 1, p: float = 0.0) -> SparseMatrix:
    """``I - alpha H`` (auto ``alpha``) for a ring lattice with optional rewiring."""
    return gen_network_sign_input(gen_small_world_edges(n, k, p, seed), "auto", n=n, seed=seed)


def bench_network(sizes: Iterable[int] = (5000, 20000, 50000), method: str = "nsf",
                  k: int = 1, p: float = 0.0, seed: int = 0) -> List[BenchRow]:
    """Sign of ``I - alpha H`` on synthetic graphs; the exact answer is ``I``.

    ``ae`` holds the Frobenius distance of the computed sign to ``I``.
    """
    rows = []
    for n in sizes:
        a = network_matrix(n, seed, k, p)
        res, dt = _timed_run(a, IterationConfig(method=method, eps_tol=NETWORK_TOL))
        err = norm(add(res.sign, identity(n), 1.0, -1.0), "frobenius")
        rows.append(BenchRow(method, n, dt, res.final_residual, res.iterations, res.status,
                             ae=err, result=res))
    return rows


@dataclass
class KernelTiming:
    kernel: str
    backend: str
    n: int
    nnz: int
    seconds: float


def bench_kernels(n: int = 2000, density: float = 0.005, repeats: int = 3,
                  seed: int = 0) -> List[KernelTiming]:
    """Time ``spgemm`` and ``spadd`` for every importable kernel backend.

    Both backends must produce the same sparsity pattern and values equal up
    to summation-order rounding; a mismatch raises ``AssertionError``.
    """
    a = gen_rand_sparse(n, density, seed)
    b = gen_rand_sparse(n, density, seed + 1)
    args_mul = (a.nrows, b.ncols, a.row_starts, a.col_indices, a.values,
                b.row_starts, b.col_indices, b.values)
    args_add = (a.nrows, 1.0, -0.5, a.row_starts, a.col_indices, a.values,
                b.row_starts, b.col_indices, b.values)
    out, reference = [], {}
    for name in _backend.available_backends():
        k = _backend.get_kernels(name)
        for kernel, fn, args in (("spgemm", k.spgemm, args_mul), ("spadd", k.spadd, args_add)):
            best = np.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                ptr, idx, val = fn(*args)
                best = min(best, time.perf_counter() - t0)
            ref = reference.setdefault(kernel, (ptr, idx, val))
            assert np.array_equal(ref[0], ptr) and np.array_equal(ref[1], idx)
            assert np.allclose(ref[2], val, rtol=1e-13, atol=1e-12)
            out.append(KernelTiming(kernel, name, n, int(ptr[-1]), best))
    return out


# -- serialization -------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[BenchRow], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in r.as_record().values()])
    return buf.getvalue()


def trace_rows(result: SignResult):
    """One tuple per iteration in ``TRACE_HEADER`` order."""
    return [(s.k, s.residual, s.nnz, s.threshold, s.dropped_norm, s.dropped_count,
             s.step_seconds) for s in result.trace]


def trace_to_csv(result: SignResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for row in trace_rows(result):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def suite_comments(suite: str, rows: Sequence[BenchRow]) -> List[str]:
    lines = [f"suite={suite}", f"backend={_backend.BACKEND}"]
    if suite == "table431":
        for n in sorted({r.n for r in rows}):
            lines.append(f"d_seed[n={n}]={table431_seed(n)}")
    return lines
