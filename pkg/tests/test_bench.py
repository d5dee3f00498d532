from __future__ import annotations

import csv

import pytest

from signum import _backend
from signum.bench import (ROW_HEADER, TRACE_HEADER, bench_kernels, bench_network,
                          bench_table421, bench_table431, rows_to_csv, suite_comments,
                          table431_seed, trace_rows, trace_to_csv)
from signum.matgen import gen_rand_sparse
from signum.sign import IterationConfig, run


def test_table421_rejects_small_nmax():
    with pytest.raises(ValueError):
        bench_table421(nmax=499)


def test_table421_twins_and_ae():
    rows = bench_table421(nmax=500, sizes=(500,))
    assert [(r.method, r.n) for r in rows] == [("nm", 500), ("nmf", 500), ("ns", 500), ("nsf", 500)]
    for r in rows:
        assert (r.ae is not None) == (r.method in ("nmf", "nsf"))
        assert r.ee is None and r.status == "converged"
    assert max(r.ae for r in rows if r.ae is not None) <= 1e-12


def test_table431_small_rows():
    rows = bench_table431(nmax=40, sizes=(30, 40, 900))
    assert sorted({r.n for r in rows}) == [30, 40]
    assert all(r.ee is not None and r.ee <= 1e-6 for r in rows)
    text = rows_to_csv(rows, suite_comments("table431", rows))
    assert f"# d_seed[n=30]={table431_seed(30)}" in text
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    parsed = list(csv.DictReader(body))
    assert tuple(parsed[0]) == ROW_HEADER and len(parsed) == 8


def test_network_rows():
    rows = bench_network(sizes=(500,), method="nsf")
    (r,) = rows
    assert r.status == "converged" and r.final_residual <= 1e-13 and r.ae <= 1e-10


def test_trace_csv_matches_result():
    res = run(gen_rand_sparse(70, 0.05, 0), IterationConfig(method="nmf"))
    lines = trace_to_csv(res).splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) - 1 == res.iterations
    rows = trace_rows(res)
    assert rows[-1][1] == res.final_residual
    assert float(lines[-1].split(",")[1]) == res.final_residual


def test_kernel_bench_covers_every_backend():
    timings = bench_kernels(n=200, density=0.02, repeats=1)
    assert {t.backend for t in timings} == set(_backend.available_backends())
    assert {t.kernel for t in timings} == {"spgemm", "spadd"}
    by = {(t.kernel, t.backend): t.nnz for t in timings}
    for kernel in ("spgemm", "spadd"):
        assert len({by[(kernel, b)] for b in _backend.available_backends()}) == 1
