"""Compressed sparse-row matrices and the arithmetic the sign solvers need.

Matrices are immutable values: every operation returns a new
:class:`SparseMatrix`.  Arithmetic only ever removes *exact* zeros; any
inexact dropping belongs to :mod:`signum.filtering`.

Dense matrices are plain two-dimensional ``numpy.ndarray`` objects
(row-major ``float64``).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._backend import kernels as _kernels
from .errors import ShapeError, SingularMatrix

NormKind = Literal["frobenius", "one", "inf"]

#: pivots with magnitude below this are treated as exact singularity
SINGULARITY_FLOOR = 1e-30

# lu_invert switches to LAPACK once the operand is this dense
_DENSE_LU_FILL = 0.15
# upper bound on the dense right-hand-side block held during inversion
_RHS_BLOCK_ENTRIES = 1 << 22
# matmul goes through BLAS when the sparse work exceeds dense flops / ratio
_DENSE_GEMM_RATIO = 16.0
_DENSE_GEMM_MAX_ENTRIES = 6000 * 6000

DenseMatrix = np.ndarray


def _locked(arr, dtype):
    arr = np.ascontiguousarray(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Real CSR matrix with strictly increasing columns and no stored zeros.

    The constructor takes ownership of the arrays it is given and marks them
    read-only.  Use :meth:`from_coo` or :func:`from_dense` to build matrices
    from arbitrary input; they canonicalise ordering and drop zeros.
    """

    nrows: int
    ncols: int
    row_starts: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nrows", int(self.nrows))
        object.__setattr__(self, "ncols", int(self.ncols))
        object.__setattr__(self, "row_starts", _locked(self.row_starts, np.int64))
        object.__setattr__(self, "col_indices", _locked(self.col_indices, np.int64))
        object.__setattr__(self, "values", _locked(self.values, np.float64))
        if self.row_starts.shape != (self.nrows + 1,):
            raise ShapeError("row_starts must have nrows + 1 entries")
        if self.col_indices.shape != self.values.shape:
            raise ShapeError("col_indices and values differ in length")

    # -- construction -------------------------------------------------
    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals, *, duplicates="sum"):
        """Build from coordinate triplets.

        ``duplicates`` is ``"sum"`` (add repeated entries) or ``"error"``.
        """
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.size == cols.size == vals.size):
            raise ShapeError("rows, cols and vals differ in length")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows
                          or cols.min() < 0 or cols.max() >= ncols):
            raise ShapeError("coordinate out of range")
        key = rows * max(ncols, 1) + cols
        order = np.argsort(key, kind="stable")
        key, vals = key[order], vals[order]
        if key.size:
            heads = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
            if heads.size != key.size:
                if duplicates == "error":
                    dup = key[np.flatnonzero(key[1:] == key[:-1])[0]]
                    raise ValueError(f"duplicate entry at {divmod(int(dup), ncols)}")
                vals = np.add.reduceat(vals, heads)
                key = key[heads]
        keep = vals != 0.0
        key, vals = key[keep], vals[keep]
        r = key // max(ncols, 1)
        ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=nrows), out=ptr[1:])
        return cls(nrows, ncols, ptr, key % max(ncols, 1), vals)

    @classmethod
    def from_scipy(cls, m):
        m = sp.csr_array(m)
        m.sum_duplicates()
        m.sort_indices()
        m.eliminate_zeros()
        return cls(m.shape[0], m.shape[1], m.indptr.astype(np.int64),
                   m.indices.astype(np.int64), m.data.astype(np.float64))

    # -- views ----------------------------------------------------------
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.values.size)

    def row_ids(self):
        """Row index of every stored entry (same order as ``values``)."""
        return np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_starts))

    def to_scipy(self):
        return sp.csr_array((self.values, self.col_indices, self.row_starts), shape=self.shape)

    def to_dense(self):
        return to_dense(self)

    def diagonal(self):
        d = np.zeros(min(self.shape))
        rows = self.row_ids()
        on = rows == self.col_indices
        d[rows[on]] = self.values[on]
        return d

    @property
    def T(self):
        return transpose(self)

    def validate(self):
        """Raise ``AssertionError`` if a storage invariant is broken."""
        ptr, idx = self.row_starts, self.col_indices
        assert ptr[0] == 0 and ptr[-1] == idx.size
        assert np.all(np.diff(ptr) >= 0)
        if idx.size:
            assert idx.min() >= 0 and idx.max() < self.ncols
            inner = np.diff(idx)
            row_break = np.zeros(idx.size - 1, dtype=bool)
            ends = ptr[1:-1]
            ends = ends[(ends > 0) & (ends < idx.size)]
            row_break[ends - 1] = True
            assert np.all((inner > 0) | row_break), "columns not strictly increasing"
        assert np.all(self.values != 0.0), "explicit zero stored"

    # -- operators ------------------------------------------------------
    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other, 1.0, 1.0)

    def __sub__(self, other):
        return add(self, other, 1.0, -1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return self.scale(float(alpha))

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return self.scale(1.0 / float(alpha))

    def scale(self, alpha):
        if alpha == 0.0:
            return zeros(self.nrows, self.ncols)
        v = alpha * self.values
        if np.all(v != 0.0):
            return SparseMatrix(self.nrows, self.ncols, self.row_starts, self.col_indices, v)
        return SparseMatrix.from_coo(self.nrows, self.ncols, self.row_ids(), self.col_indices, v)

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


def zeros(nrows, ncols=None):
    ncols = nrows if ncols is None else ncols
    return SparseMatrix(nrows, ncols, np.zeros(nrows + 1, dtype=np.int64),
                        np.empty(0, dtype=np.int64), np.empty(0))


def identity(n):
    return diag(np.ones(n))


def diag(values):
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    idx = np.arange(n, dtype=np.int64)
    return SparseMatrix.from_coo(n, n, idx, idx, values)


def to_dense(a: SparseMatrix) -> DenseMatrix:
    out = np.zeros(a.shape)
    out[a.row_ids(), a.col_indices] = a.values
    return out


def from_dense(d, drop_tol: float = 0.0) -> SparseMatrix:
    """CSR copy of ``d`` keeping entries with ``|d_ij| > drop_tol``."""
    d = np.atleast_2d(np.asarray(d, dtype=np.float64))
    mask = np.abs(d) > drop_tol if drop_tol > 0 else d != 0.0
    rows, cols = np.nonzero(mask)
    ptr = np.zeros(d.shape[0] + 1, dtype=np.int64)
    np.cumsum(mask.sum(axis=1), out=ptr[1:])
    return SparseMatrix(d.shape[0], d.shape[1], ptr, cols, d[rows, cols])


def transpose(a: SparseMatrix) -> SparseMatrix:
    order = np.argsort(a.col_indices, kind="stable")
    ptr = np.zeros(a.ncols + 1, dtype=np.int64)
    np.cumsum(np.bincount(a.col_indices, minlength=a.ncols), out=ptr[1:])
    return SparseMatrix(a.ncols, a.nrows, ptr, a.row_ids()[order], a.values[order])


def add(a: SparseMatrix, b: SparseMatrix, alpha: float = 1.0, beta: float = 1.0) -> SparseMatrix:
    """``alpha * a + beta * b``; only exact cancellations are pruned."""
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    ptr, idx, val = _kernels.spadd(a.nrows, float(alpha), float(beta),
                                   a.row_starts, a.col_indices, a.values,
                                   b.row_starts, b.col_indices, b.values)
    return SparseMatrix(a.nrows, a.ncols, ptr, idx, val)


def matmul(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """Exact sparse product (row-wise sparse accumulator).

    Operands dense enough that BLAS wins are multiplied densely instead;
    structural zeros still come out as exact zeros and are not stored.
    """
    if a.ncols != b.nrows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    if _prefer_dense(a, b):
        return from_dense(to_dense(a) @ to_dense(b))
    ptr, idx, val = _kernels.spgemm(a.nrows, b.ncols,
                                    a.row_starts, a.col_indices, a.values,
                                    b.row_starts, b.col_indices, b.values)
    return SparseMatrix(a.nrows, b.ncols, ptr, idx, val)


def _prefer_dense(a, b):
    n, k, m = a.nrows, a.ncols, b.ncols
    if max(n * k, k * m, n * m) > _DENSE_GEMM_MAX_ENTRIES or n * k * m == 0:
        return False
    work = float(np.diff(b.row_starts)[a.col_indices].sum())
    return work * _DENSE_GEMM_RATIO > float(n) * k * m


def norm(a: SparseMatrix, kind: NormKind = "frobenius") -> float:
    """Frobenius, one (max column sum) or inf (max row sum) norm."""
    if a.nnz == 0:
        return 0.0
    if kind in ("frobenius", "fro"):
        return float(np.linalg.norm(a.values))
    absval = np.abs(a.values)
    if kind == "one":
        return float(np.bincount(a.col_indices, absval, minlength=a.ncols).max())
    if kind == "inf":
        return float(np.bincount(a.row_ids(), absval, minlength=a.nrows).max())
    raise ValueError(f"unknown norm kind {kind!r}")


def _require_square(a):
    if a.nrows != a.ncols:
        raise ShapeError(f"matrix must be square, got {a.shape}")


class _LU:
    """LU factors with partial pivoting; sparse (SuperLU) or dense (LAPACK)."""

    def __init__(self, a: SparseMatrix):
        _require_square(a)
        self.n = n = a.nrows
        self.dense = n > 0 and a.nnz >= _DENSE_LU_FILL * n * n
        if n == 0:
            return
        if self.dense:
            with warnings.catch_warnings():
                # zero pivots are reported through SingularMatrix below
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(to_dense(a), check_finite=False)
            pivots = np.abs(np.diag(lu))
            self.factors = (lu, piv)
        else:
            try:
                self.factors = splu(a.to_scipy().tocsc(), permc_spec="COLAMD",
                                    diag_pivot_thresh=1.0)
            except RuntimeError as exc:  # "Factor is exactly singular"
                raise SingularMatrix(str(exc)) from None
            pivots = np.abs(self.factors.U.diagonal())
        if not np.all(np.isfinite(pivots)) or pivots.min() < SINGULARITY_FLOOR:
            raise SingularMatrix(f"pivot magnitude {pivots.min():.3e} below floor")

    def solve(self, rhs, trans=False):
        if self.dense:
            return sla.lu_solve(self.factors, rhs, trans=1 if trans else 0, check_finite=False)
        return self.factors.solve(rhs, trans="T" if trans else "N")


def lu_invert(a: SparseMatrix) -> SparseMatrix:
    """Inverse via LU with partial pivoting, solved a block of rows at a time.

    Raises :class:`SingularMatrix` when a pivot magnitude is below
    ``SINGULARITY_FLOOR``.
    """
    lu = _LU(a)
    n = lu.n
    if n == 0:
        return zeros(0)
    step = max(1, min(n, _RHS_BLOCK_ENTRIES // n))
    ptrs, idxs, vals = [np.zeros(1, dtype=np.int64)], [], []
    base = 0
    for r0 in range(0, n, step):
        r1 = min(n, r0 + step)
        rhs = np.zeros((n, r1 - r0))
        rhs[np.arange(r0, r1), np.arange(r1 - r0)] = 1.0
        # rows of inv(A) are columns of inv(A^T)
        rows_blk = np.ascontiguousarray(lu.solve(rhs, trans=True).T)
        if not np.all(np.isfinite(rows_blk)):
            raise SingularMatrix("non-finite entries in inverse")
        mask = rows_blk != 0.0
        counts = mask.sum(axis=1)
        ptrs.append(base + np.cumsum(counts))
        idxs.append(np.nonzero(mask)[1])
        vals.append(rows_blk[mask])
        base += int(counts.sum())
    return SparseMatrix(n, n, np.concatenate(ptrs), np.concatenate(idxs), np.concatenate(vals))


def lu_solve(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """Solve ``a @ x = b`` for a sparse right-hand side."""
    if a.nrows != b.nrows:
        raise ShapeError(f"cannot solve {a.shape} against {b.shape}")
    lu = _LU(a)
    x = lu.solve(to_dense(b))
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("non-finite entries in solution")
    return from_dense(np.atleast_2d(x).reshape(b.shape))


def power_iteration_radius(a: SparseMatrix, iters: int = 100, seed: int = 0) -> float:
    """Spectral-radius estimate ``||A v|| / ||v||`` after ``iters`` power steps."""
    _require_square(a)
    if a.nnz == 0 or a.nrows == 0:
        return 0.0
    m = a.to_scipy()
    v = np.random.default_rng(seed).standard_normal(a.nrows)
    v /= np.linalg.norm(v)
    ratio = 0.0
    for _ in range(max(1, iters)):
        w = m @ v
        ratio = float(np.linalg.norm(w))
        if ratio == 0.0:
            return 0.0
        v = w / ratio
    return ratio


def submatrix(a: SparseMatrix, r0: int, r1: int, c0: int, c1: int) -> SparseMatrix:
    s0, s1 = a.row_starts[r0], a.row_starts[r1]
    cols = a.col_indices[s0:s1]
    keep = (cols >= c0) & (cols < c1)
    rows = np.repeat(np.arange(r1 - r0, dtype=np.int64), np.diff(a.row_starts[r0:r1 + 1]))
    ptr = np.zeros(r1 - r0 + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows[keep], minlength=r1 - r0), out=ptr[1:])
    return SparseMatrix(r1 - r0, c1 - c0, ptr, cols[keep] - c0, a.values[s0:s1][keep])


def block(blocks: Sequence[Sequence[SparseMatrix | None]]) -> SparseMatrix:
    """Assemble a block matrix; ``None`` stands for a zero block."""
    heights = []
    for brow in blocks:
        h = {b.nrows for b in brow if b is not None}
        if len(h) != 1:
            raise ShapeError("every block row needs one consistent, known height")
        heights.append(h.pop())
    widths = []
    for j in range(len(blocks[0])):
        w = {brow[j].ncols for brow in blocks if brow[j] is not None}
        if len(w) != 1:
            raise ShapeError("every block column needs one consistent, known width")
        widths.append(w.pop())
    roff = np.r_[0, np.cumsum(heights)]
    coff = np.r_[0, np.cumsum(widths)]
    rows, cols, vals = [], [], []
    for i, brow in enumerate(blocks):
        for j, b in enumerate(brow):
            if b is None or b.nnz == 0:
                continue
            rows.append(b.row_ids() + roff[i])
            cols.append(b.col_indices + coff[j])
            vals.append(b.values)
    if not rows:
        return zeros(int(roff[-1]), int(coff[-1]))
    return SparseMatrix.from_coo(int(roff[-1]), int(coff[-1]), np.concatenate(rows),
                                 np.concatenate(cols), np.concatenate(vals), duplicates="error")
