"""NumPy implementations of the CSR kernels.

Used when the compiled extension is unavailable (or forced through
``SIGNUM_BACKEND=python``).  The product is formed by expanding every
``a[i, k] * b[k, j]`` term, stable-sorting by ``(i, j)`` and reducing each
run, so per-entry summation order matches the compiled Gustavson kernel.
"""
from __future__ import annotations

import numpy as np

# cap on expanded product terms held in memory at once
_CHUNK_TERMS = 1 << 22


def _expand_rows(a_ptr, a_idx, a_val, b_ptr, b_idx, b_val, r0, r1):
    start, stop = a_ptr[r0], a_ptr[r1]
    k = a_idx[start:stop]
    av = a_val[start:stop]
    rows = np.repeat(np.arange(r0, r1, dtype=np.int64), np.diff(a_ptr[r0:r1 + 1]))
    lens = b_ptr[k + 1] - b_ptr[k]
    total = int(lens.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0)
    # position of each term inside b's storage
    offsets = np.repeat(b_ptr[k] - np.cumsum(lens) + lens, lens) + np.arange(total)
    term_rows = np.repeat(rows, lens)
    term_cols = b_idx[offsets]
    term_vals = np.repeat(av, lens) * b_val[offsets]
    return term_rows, term_cols, term_vals


def _compress(nrows, ncols, rows, cols, vals, row_base=0):
    """Sum duplicate (row, col) terms in encounter order; drop exact zeros."""
    key = rows * ncols + cols
    order = np.argsort(key, kind="stable")
    key = key[order]
    vals = vals[order]
    if key.size:
        heads = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
        summed = np.add.reduceat(vals, heads)
        key = key[heads]
    else:
        summed = vals
    keep = summed != 0.0
    key = key[keep]
    summed = summed[keep]
    out_rows = key // ncols - row_base
    out_cols = key % ncols
    counts = np.bincount(out_rows, minlength=nrows)
    ptr = np.zeros(nrows + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, out_cols.astype(np.int64), summed.astype(np.float64)


def spgemm(nrows, ncols, a_ptr, a_idx, a_val, b_ptr, b_idx, b_val):
    a_ptr = np.asarray(a_ptr, dtype=np.int64)
    a_idx = np.asarray(a_idx, dtype=np.int64)
    b_ptr = np.asarray(b_ptr, dtype=np.int64)
    b_idx = np.asarray(b_idx, dtype=np.int64)
    a_val = np.asarray(a_val, dtype=np.float64)
    b_val = np.asarray(b_val, dtype=np.float64)

    per_entry = b_ptr[a_idx + 1] - b_ptr[a_idx]
    work = np.r_[0, np.cumsum(per_entry)][a_ptr]

    ptr_parts, idx_parts, val_parts = [np.zeros(1, dtype=np.int64)], [], []
    base = 0
    r0 = 0
    while r0 < nrows:
        # grow the chunk until the term budget is hit (at least one row)
        r1 = int(np.searchsorted(work, work[r0] + _CHUNK_TERMS, side="right")) - 1
        r1 = min(max(r1, r0 + 1), nrows)
        rows, cols, vals = _expand_rows(a_ptr, a_idx, a_val, b_ptr, b_idx, b_val, r0, r1)
        ptr, idx, val = _compress(r1 - r0, ncols, rows, cols, vals, row_base=r0)
        ptr_parts.append(ptr[1:] + base)
        idx_parts.append(idx)
        val_parts.append(val)
        base += idx.size
        r0 = r1
    out_idx = np.concatenate(idx_parts) if idx_parts else np.empty(0, dtype=np.int64)
    out_val = np.concatenate(val_parts) if val_parts else np.empty(0)
    return np.concatenate(ptr_parts), out_idx, out_val


def spadd(nrows, alpha, beta, a_ptr, a_idx, a_val, b_ptr, b_idx, b_val):
    a_ptr = np.asarray(a_ptr, dtype=np.int64)
    b_ptr = np.asarray(b_ptr, dtype=np.int64)
    ncols = int(max(np.max(a_idx, initial=-1), np.max(b_idx, initial=-1))) + 1
    ncols = max(ncols, 1)
    rows = np.concatenate([
        np.repeat(np.arange(nrows, dtype=np.int64), np.diff(a_ptr)),
        np.repeat(np.arange(nrows, dtype=np.int64), np.diff(b_ptr)),
    ])
    cols = np.concatenate([np.asarray(a_idx, dtype=np.int64), np.asarray(b_idx, dtype=np.int64)])
    vals = np.concatenate([alpha * np.asarray(a_val, dtype=np.float64),
                           beta * np.asarray(b_val, dtype=np.float64)])
    return _compress(nrows, ncols, rows, cols, vals)
