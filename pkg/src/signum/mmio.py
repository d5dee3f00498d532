"""Matrix Market coordinate files (real, general or symmetric).

Only the subset the tools exchange is supported: ``%%MatrixMarket matrix
coordinate real general|symmetric``.  Indices are 1-based on disk.  Values
are written with 17 significant digits, which round-trips every double.
"""
from __future__ import annotations

import io
import os
from typing import Union

import numpy as np

from .errors import MatrixMarketError
from .sparse import SparseMatrix

PathLike = Union[str, os.PathLike]

_BANNER = "%%matrixmarket"


def _parse_header(line):
    parts = line.strip().lower().split()
    if len(parts) != 5 or parts[0] != _BANNER:
        raise MatrixMarketError(f"not a Matrix Market header: {line.strip()!r}")
    _, obj, fmt, field, symmetry = parts
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"only 'matrix coordinate' is supported, got {obj} {fmt}")
    if field not in ("real", "integer"):
        raise MatrixMarketError(f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}")
    return symmetry


def read_matrix_market(path: PathLike) -> SparseMatrix:
    """Read a coordinate file; symmetric storage is expanded to full.

    Raises
    ------
    MatrixMarketError
        On a malformed header or size line, a wrong entry count, an index
        outside the declared shape, an upper-triangle entry in a symmetric
        file, or a repeated ``(i, j)`` position.
    """
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    return _parse(text, str(path))


def _parse(text, where="<string>"):
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError(f"{where}: empty file")
    symmetry = _parse_header(lines[0])
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError(f"{where}: missing size line")
    try:
        nrows, ncols, count = (int(t) for t in body[0].split())
    except ValueError:
        raise MatrixMarketError(f"{where}: bad size line {body[0]!r}") from None
    if min(nrows, ncols, count) < 0:
        raise MatrixMarketError(f"{where}: negative size")
    if symmetry == "symmetric" and nrows != ncols:
        raise MatrixMarketError(f"{where}: symmetric matrix must be square")
    entries = body[1:]
    if len(entries) != count:
        raise MatrixMarketError(f"{where}: header promises {count} entries, found {len(entries)}")

    if count:
        try:
            data = np.loadtxt(io.StringIO("\n".join(entries)), dtype=np.float64, ndmin=2)
        except ValueError as exc:
            raise MatrixMarketError(f"{where}: unreadable entry ({exc})") from None
        if data.shape[1] != 3:
            raise MatrixMarketError(f"{where}: expected 'i j value' per entry")
        rows = data[:, 0].astype(np.int64) - 1
        cols = data[:, 1].astype(np.int64) - 1
        if np.any(rows + 1 != data[:, 0]) or np.any(cols + 1 != data[:, 1]):
            raise MatrixMarketError(f"{where}: non-integer index")
        vals = data[:, 2]
    else:
        rows = cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0)

    bad = (rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise MatrixMarketError(f"{where}: entry {k + 1} index ({rows[k] + 1}, {cols[k] + 1}) "
                                f"outside {nrows} x {ncols}")
    if symmetry == "symmetric":
        if np.any(rows < cols):
            raise MatrixMarketError(f"{where}: symmetric file holds an upper-triangle entry")
        off = rows != cols
        rows, cols, vals = np.r_[rows, cols[off]], np.r_[cols, rows[off]], np.r_[vals, vals[off]]
    try:
        return SparseMatrix.from_coo(nrows, ncols, rows, cols, vals, duplicates="error")
    except ValueError as exc:
        raise MatrixMarketError(f"{where}: {exc}") from None


def write_matrix_market(a: SparseMatrix, path: PathLike, comment: str | None = None) -> None:
    """Write ``a`` in ``coordinate real general`` form, 1-based, 17 digits."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix_market(a, comment))


def format_matrix_market(a: SparseMatrix, comment: str | None = None) -> str:
    out = io.StringIO()
    out.write("%%MatrixMarket matrix coordinate real general\n")
    if comment:
        for line in comment.splitlines():
            out.write(f"% {line}\n")
    out.write(f"{a.nrows} {a.ncols} {a.nnz}\n")
    if a.nnz:
        table = np.column_stack([a.row_ids() + 1, a.col_indices + 1])
        for (i, j), v in zip(table.tolist(), a.values.tolist()):
            out.write(f"{i} {j} {v:.17g}\n")
    return out.getvalue()
