"""Newton (NM), Newton-Schulz (NS) and their filtered variants (NMF, NSF).

All four share one loop::

    X_1 = A,  e_1 = ||I - X_1^2||
    while e_k > eps_tol:
        Xbar = 0.5 (X_k + X_k^-1)              # nm, nmf
        Xbar = 0.5 X_k (3I - X_k^2)            # ns, nsf
        X_{k+1} = Xbar - F                     # nmf, nsf: F dropped within budget
        e_{k+1} = ||I - X_{k+1}^2||

Only the new iterate is filtered; residual matrices are exact.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import filtering
from .errors import (Diverged, MaxIterExceeded, NsPreconditionWarning, SignumError,
                     SingularIterate, SingularMatrix)
from .filtering import FilterReport, FilterSchedule, StepNorms
from .sparse import SparseMatrix, add, identity, lu_invert, matmul, norm

METHODS = ("nm", "ns", "nmf", "nsf")

# Diverged: residual grew monotonically over this many steps by more than the factor
_DIVERGE_STEPS = 3
_DIVERGE_FACTOR = 10.0
# stagnation: inside the quadratic zone a step that fails to halve the residual
# means the rounding floor was reached
_STAGNATION_ZONE = 1e-6
_STAGNATION_RATIO = 0.5


class OracleFailure(SignumError):
    pass


@dataclass(frozen=True)
class IterationConfig:
    """Solver knobs.

    ``prescale`` divides the input by ``sqrt(||A||_1 ||A||_inf)`` (an upper
    bound on the spectral norm) before iterating; ``sign(cA) = sign(A)`` for
    ``c > 0``.  ``None`` means: only for ``ns``/``nsf`` and only when the
    bound exceeds one.

    ``on_stagnation="stop"`` ends the run (unconverged, status
    ``"stagnated"``) once the residual stops contracting below ``1e-6``;
    ``"continue"`` keeps going until ``max_iter``.
    """

    method: str = "nm"
    eps_tol: float = 1e-12
    max_iter: int = 100
    schedule: Optional[FilterSchedule] = None
    norm_kind: str = "frobenius"
    prescale: Optional[bool] = None
    on_stagnation: str = "stop"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.eps_tol > 0:
            raise ValueError("eps_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.norm_kind not in ("frobenius", "one"):
            raise ValueError(f"unsupported norm {self.norm_kind!r}")
        if self.on_stagnation not in ("stop", "continue"):
            raise ValueError("on_stagnation must be 'stop' or 'continue'")

    @property
    def filtered(self):
        return self.method in ("nmf", "nsf")

    @property
    def newton(self):
        return self.method in ("nm", "nmf")

    def filter_schedule(self):
        if self.schedule is not None:
            return self.schedule
        return FilterSchedule(eps_tol=self.eps_tol, norm_kind=self.norm_kind)


@dataclass
class TraceStep:
    k: int
    residual: float
    nnz: int
    step_seconds: float
    filter_report: Optional[FilterReport] = None

    @property
    def threshold(self):
        return self.filter_report.scalar_threshold if self.filter_report else 0.0

    @property
    def dropped_norm(self):
        return self.filter_report.dropped_norm if self.filter_report else 0.0

    @property
    def dropped_count(self):
        return self.filter_report.dropped_count if self.filter_report else 0


@dataclass
class IterationTrace:
    initial_residual: float
    initial_nnz: int
    steps: List[TraceStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def residuals(self):
        """``[e_1, e_2, ...]`` including the residual of the input."""
        return [self.initial_residual] + [s.residual for s in self.steps]

    @property
    def final_residual(self):
        return self.steps[-1].residual if self.steps else self.initial_residual

    @property
    def wall_seconds(self):
        return sum(s.step_seconds for s in self.steps)

    def filter_reports(self):
        return [s.filter_report for s in self.steps if s.filter_report is not None]


@dataclass
class SignResult:
    sign: SparseMatrix
    trace: IterationTrace
    converged: bool
    iterations: int
    method: str
    scale: float = 1.0
    warnings: List[str] = field(default_factory=list)
    status: str = "running"

    @property
    def final_residual(self):
        return self.trace.final_residual


@dataclass
class StepState:
    """What a ``run`` callback sees after each step."""

    k: int
    x: SparseMatrix
    x_unfiltered: SparseMatrix
    residual_matrix: SparseMatrix
    residual: float
    filter_report: Optional[FilterReport]


def newton_step(x: SparseMatrix) -> SparseMatrix:
    """``0.5 (X + X^-1)``; a singular ``X`` raises :class:`SingularIterate`."""
    try:
        xinv = lu_invert(x)
    except SingularMatrix as exc:
        raise SingularIterate(str(exc)) from None
    return add(x, xinv, 0.5, 0.5)


def newton_schulz_step(x: SparseMatrix, x2: Optional[SparseMatrix] = None) -> SparseMatrix:
    """``0.5 X (3I - X^2) = 1.5 X - 0.5 X X^2``; pass ``x2`` to reuse ``X^2``."""
    if x2 is None:
        x2 = matmul(x, x)
    return add(x, matmul(x, x2), 1.5, -0.5)


def residual_matrix(x: SparseMatrix, x2: Optional[SparseMatrix] = None) -> SparseMatrix:
    if x2 is None:
        x2 = matmul(x, x)
    return add(identity(x.nrows), x2, 1.0, -1.0)


def residual(x: SparseMatrix, norm_kind: str = "frobenius") -> float:
    """``||I - X^2||``."""
    return norm(residual_matrix(x), norm_kind)


def _scale_factor(a, cfg, initial_residual):
    want = cfg.prescale
    if want is None:
        want = not cfg.newton and initial_residual >= 1.0
    if not want:
        return 1.0
    s = math.sqrt(norm(a, "one") * norm(a, "inf"))
    if cfg.prescale is None and s <= 1.0:
        return 1.0
    return s if s > 0 else 1.0


def _diverging(history):
    if len(history) <= _DIVERGE_STEPS:
        return False
    tail = history[-(_DIVERGE_STEPS + 1):]
    rising = all(b > a for a, b in zip(tail, tail[1:]))
    return rising and tail[-1] > _DIVERGE_FACTOR * tail[0]


def run(a: SparseMatrix, cfg: IterationConfig,
        callback: Optional[Callable[[StepState], None]] = None) -> SignResult:
    """Iterate to ``sign(a)``.

    Raises :class:`MaxIterExceeded`, :class:`Diverged` (both carry the
    partial :class:`SignResult` as ``.result``) or :class:`SingularIterate`.
    A run that stagnates at its rounding floor returns normally with
    ``converged=False`` and ``status="stagnated"``.
    """
    if a.nrows != a.ncols:
        raise ValueError(f"sign needs a square matrix, got {a.shape}")
    kind = cfg.norm_kind
    eye = identity(a.nrows)

    x = a
    x2 = matmul(x, x)
    e = norm(add(eye, x2, 1.0, -1.0), kind)
    scale = _scale_factor(a, cfg, e)
    if scale != 1.0:
        x = a.scale(1.0 / scale)
        x2 = matmul(x, x)
        e = norm(add(eye, x2, 1.0, -1.0), kind)

    result = SignResult(sign=x, trace=IterationTrace(e, x.nnz), converged=False,
                        iterations=0, method=cfg.method, scale=scale)
    if not cfg.newton and e >= 1.0:
        msg = f"||I - A^2|| = {e:.3g} >= 1; Newton-Schulz may not converge"
        result.warnings.append(msg)
        warnings.warn(msg, NsPreconditionWarning, stacklevel=2)

    schedule = cfg.filter_schedule() if cfg.filtered else None
    history = [e]
    while not e <= cfg.eps_tol:
        if result.iterations >= cfg.max_iter:
            result.status = "max_iter"
            raise MaxIterExceeded(
                f"{cfg.method}: residual {e:.3e} after {cfg.max_iter} iterations", result)
        t0 = time.perf_counter()
        if cfg.newton:
            try:
                xinv = lu_invert(x)
            except SingularMatrix as exc:
                raise SingularIterate(f"iterate {result.iterations + 1}: {exc}") from None
            xbar = add(x, xinv, 0.5, 0.5)
        else:
            xinv = None
            xbar = newton_schulz_step(x, x2)

        report = None
        x_new = xbar
        if schedule is not None:
            state = StepNorms(
                residual=e,
                x_norm=norm(x, schedule.norm_kind),
                xinv_norm=norm(xinv, schedule.norm_kind) if xinv is not None else None,
            )
            budget = filtering.budget_for_step(schedule, cfg.method, state)
            phase = "adaptive" if schedule.is_adaptive(e) else "fixed"
            x_new, report = filtering.filter_to_budget(xbar, budget, schedule.norm_kind, phase)

        x2 = matmul(x_new, x_new)
        rmat = add(eye, x2, 1.0, -1.0)
        e = norm(rmat, kind)
        x = x_new
        result.iterations += 1
        result.sign = x
        result.trace.steps.append(TraceStep(result.iterations, e, x.nnz,
                                            time.perf_counter() - t0, report))
        if callback is not None:
            callback(StepState(result.iterations, x, xbar, rmat, e, report))

        history.append(e)
        if not np.isfinite(e) or _diverging(history):
            result.status = "diverged"
            raise Diverged(f"{cfg.method}: residual grew to {e:.3e}", result)
        if (cfg.on_stagnation == "stop" and e > cfg.eps_tol
                and history[-2] < _STAGNATION_ZONE and e > _STAGNATION_RATIO * history[-2]):
            result.status = "stagnated"
            msg = f"residual stagnated at {e:.3e} above eps_tol={cfg.eps_tol:.1e}"
            result.warnings.append(msg)
            return result

    result.converged = True
    result.status = "converged"
    return result


def sign(a: SparseMatrix, method: str = "nmf", eps_tol: float = 1e-12, **kw) -> SparseMatrix:
    """Shortcut returning only the sign matrix."""
    return run(a, IterationConfig(method=method, eps_tol=eps_tol, **kw)).sign


def dense_sign_oracle(d, max_iter: int = 100):
    """Reference ``sign(d)`` for small dense matrices.

    Symmetric input goes through an eigendecomposition; anything else
    through unscaled dense Newton iteration.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if d.shape != (n, n):
        raise ValueError("square matrix required")
    if n > 200:
        raise ValueError("dense oracle is limited to n <= 200")
    scale = max(np.abs(d).max(), 1e-300)
    if np.allclose(d, d.T, rtol=0.0, atol=1e-14 * scale):
        w, v = np.linalg.eigh(0.5 * (d + d.T))
        if np.min(np.abs(w)) <= 1e-13 * max(np.abs(w).max(), 1e-300):
            raise OracleFailure("eigenvalue at zero; sign undefined")
        return (v * np.sign(w)) @ v.T
    x = d.copy()
    eye = np.eye(n)
    for _ in range(max_iter):
        try:
            x = 0.5 * (x + np.linalg.inv(x))
        except np.linalg.LinAlgError as exc:
            raise OracleFailure(str(exc)) from None
        if np.linalg.norm(eye - x @ x) <= 1e-13 * n:
            return x
    raise OracleFailure("dense Newton did not converge")
