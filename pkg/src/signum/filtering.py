"""Norm-budgeted entry dropping.

A filter event removes every off-diagonal entry whose magnitude does not
exceed a scalar threshold.  The threshold is chosen so that the matrix of
removed entries has norm no larger than a budget, and the budget follows a
two-phase schedule: a fixed fraction of the convergence tolerance while the
residual is large, then the adaptive Newton / Newton-Schulz bounds once the
residual has dropped below ``switch_residual``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .sparse import SparseMatrix

Phase = Literal["fixed", "adaptive"]

N_BUCKETS = 64
# buckets span [BUCKET_FLOOR * max|a|, max|a|]; anything smaller lands in bucket 0
BUCKET_FLOOR = 1e-30


@dataclass(frozen=True)
class FilterSchedule:
    eps_tol: float
    fixed_coeff: float = 1e-4
    switch_residual: float = 1e-6
    norm_kind: str = "frobenius"

    def __post_init__(self):
        fixed = self.fixed_coeff * self.eps_tol
        if not (0.0 < fixed < self.switch_residual < 1.0):
            raise ValueError(
                "schedule needs 0 < fixed_coeff*eps_tol < switch_residual < 1, got "
                f"{fixed:g}, {self.switch_residual:g}")
        if self.norm_kind not in ("frobenius", "one"):
            raise ValueError(f"unsupported filter norm {self.norm_kind!r}")

    @property
    def fixed_budget(self):
        return self.fixed_coeff * self.eps_tol

    def is_adaptive(self, residual):
        """Adaptive bounds apply strictly below the switch residual."""
        return residual < self.switch_residual


@dataclass(frozen=True)
class FilterReport:
    budget: float
    scalar_threshold: float
    dropped_count: int
    dropped_norm: float
    phase: Optional[Phase]


@dataclass(frozen=True)
class StepNorms:
    """Norms available when the filter budget for one step is set.

    ``residual`` and ``x_norm`` belong to the iterate the step started from;
    ``xinv_norm`` is the norm of its inverse (Newton only).
    """

    residual: float
    x_norm: float
    xinv_norm: Optional[float] = None


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0.0:
            raise ValueError(f"{name} must be positive, got {v!r}")


def budget_nmf(r_norm: float, x_norm: float, xinv_norm: float) -> float:
    """Newton bound ``||R||^2 / (||X|| + ||X^-1||)``."""
    _positive(r_norm=r_norm, x_norm=x_norm, xinv_norm=xinv_norm)
    return r_norm * r_norm / (x_norm + xinv_norm)


def budget_nsf(r_prev_norm: float, x_prev_norm: float) -> float:
    """Newton-Schulz bound ``(3/4)||R||^2 / (3||X|| + ||X||^3)``."""
    _positive(r_prev_norm=r_prev_norm, x_prev_norm=x_prev_norm)
    return 0.75 * r_prev_norm ** 2 / (3.0 * x_prev_norm + x_prev_norm ** 3)


def budget_for_step(schedule: FilterSchedule, method: str, state: StepNorms) -> float:
    if not schedule.is_adaptive(state.residual):
        return schedule.fixed_budget
    if method == "nmf":
        return budget_nmf(state.residual, state.x_norm, state.xinv_norm)
    if method == "nsf":
        return budget_nsf(state.residual, state.x_norm)
    raise ValueError(f"no filter budget for method {method!r}")


def _candidates(a: SparseMatrix, protect_diagonal: bool):
    if not protect_diagonal:
        return np.ones(a.nnz, dtype=bool)
    return a.row_ids() != a.col_indices


def _masked_norm(a: SparseMatrix, mask, kind):
    """Norm of the matrix made of the entries of ``a`` selected by ``mask``."""
    vals = a.values[mask]
    if vals.size == 0:
        return 0.0
    if kind in ("frobenius", "fro"):
        return float(np.linalg.norm(vals))
    if kind == "one":
        return float(np.bincount(a.col_indices[mask], np.abs(vals), minlength=a.ncols).max())
    if kind == "inf":
        return float(np.bincount(a.row_ids()[mask], np.abs(vals), minlength=a.nrows).max())
    raise ValueError(f"unknown norm kind {kind!r}")


def drop_mask(a: SparseMatrix, threshold: float, protect_diagonal: bool = True):
    """Boolean mask (storage order) of the entries a filter would remove."""
    if threshold <= 0.0:
        return np.zeros(a.nnz, dtype=bool)
    return (np.abs(a.values) <= threshold) & _candidates(a, protect_diagonal)


def _bucket_of(mags, amax):
    lo = BUCKET_FLOOR * amax
    span = math.log(amax / lo)
    with np.errstate(divide="ignore"):
        b = np.floor(N_BUCKETS * (np.log(mags) - math.log(lo)) / span)
    return np.clip(b, 0, N_BUCKETS - 1).astype(np.int64)


def _absorbed_buckets(bucket, mags, cols, rows, budget, kind, shape):
    """Number of leading buckets whose combined entries fit inside ``budget``."""
    if kind in ("frobenius", "fro"):
        cum = np.cumsum(np.bincount(bucket, mags * mags, minlength=N_BUCKETS))
        return int(np.searchsorted(cum, budget * budget, side="right"))
    axis = cols if kind == "one" else rows
    size = shape[1] if kind == "one" else shape[0]
    sums = np.zeros(size)
    order = np.argsort(bucket, kind="stable")
    edges = np.searchsorted(bucket[order], np.arange(N_BUCKETS + 1))
    for k in range(N_BUCKETS):
        sel = order[edges[k]:edges[k + 1]]
        if sel.size:
            sums += np.bincount(axis[sel], mags[sel], minlength=size)
            if sums.max() > budget:
                return k
    return N_BUCKETS


def select_threshold(a: SparseMatrix, budget: float, norm_kind: str = "frobenius",
                     protect_diagonal: bool = True) -> float:
    """Largest threshold (to histogram resolution) whose dropped set fits the budget.

    Magnitudes go into 64 logarithmic buckets; whole buckets are absorbed in
    ascending order while the accumulated norm stays within ``budget``.  The
    returned threshold is the largest magnitude actually absorbed (0 when
    nothing is), and an exact pass over the matrix confirms the dropped norm
    before returning, backing off a bucket at a time if rounding disagrees.
    """
    if budget <= 0.0 or a.nnz == 0:
        return 0.0
    cand = _candidates(a, protect_diagonal)
    mags = np.abs(a.values[cand])
    if mags.size == 0:
        return 0.0
    amax = float(mags.max())
    bucket = _bucket_of(mags, amax)
    k = _absorbed_buckets(bucket, mags, a.col_indices[cand], a.row_ids()[cand],
                          budget, norm_kind, a.shape)
    while k > 0:
        inside = bucket < k
        if not inside.any():
            return 0.0
        eps = float(mags[inside].max())
        if _masked_norm(a, drop_mask(a, eps, protect_diagonal), norm_kind) <= budget:
            return eps
        k = int(bucket[inside].max())
    return 0.0


def split(a: SparseMatrix, threshold: float, protect_diagonal: bool = True):
    """Return ``(kept, dropped)`` with ``kept + dropped == a`` exactly."""
    mask = drop_mask(a, threshold, protect_diagonal)
    return _take(a, ~mask), _take(a, mask)


def _take(a, mask):
    ptr = np.zeros(a.nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(a.row_ids()[mask], minlength=a.nrows), out=ptr[1:])
    return SparseMatrix(a.nrows, a.ncols, ptr, a.col_indices[mask], a.values[mask])


def apply_filter(a: SparseMatrix, threshold: float, *, norm_kind: str = "frobenius",
                 budget: float = math.inf, phase: Optional[Phase] = None,
                 protect_diagonal: bool = True):
    """Drop off-diagonal entries with ``|a_ij| <= threshold``.

    Returns the filtered matrix and a :class:`FilterReport` whose
    ``dropped_norm`` is the norm of the removed entries.
    """
    mask = drop_mask(a, threshold, protect_diagonal)
    report = FilterReport(
        budget=budget,
        scalar_threshold=float(threshold),
        dropped_count=int(mask.sum()),
        dropped_norm=_masked_norm(a, mask, norm_kind),
        phase=phase,
    )
    if report.dropped_count == 0:
        return a, report
    return _take(a, ~mask), report


def filter_to_budget(a: SparseMatrix, budget: float, norm_kind: str = "frobenius",
                     phase: Optional[Phase] = None):
    """Select a threshold for ``budget`` and apply it in one call."""
    eps = select_threshold(a, budget, norm_kind)
    return apply_filter(a, eps, norm_kind=norm_kind, budget=budget, phase=phase)
