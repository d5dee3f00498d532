"""Matrix square roots and continuous-time Riccati solutions through ``sign``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ConsistencyError, ShapeError, SingularMatrix, SingularW12
from .sign import IterationConfig, IterationTrace, SignResult, run
from .sparse import (SparseMatrix, add, block, identity, lu_invert, lu_solve, matmul, norm,
                     submatrix, transpose)

SQRT_CONSISTENCY_TOL = 1e-6


def symmetrize(a: SparseMatrix) -> SparseMatrix:
    return add(a, transpose(a), 0.5, 0.5)


def sqrt_via_sign(b: SparseMatrix, cfg: IterationConfig, *, return_result: bool = False):
    """``(B^{1/2}, B^{-1/2})`` from the off-diagonal blocks of ``sign([[0, B], [I, 0]])``.

    ``B`` must have no eigenvalues on the closed negative real axis; this is
    not checked and shows up as a solver failure.  Raises
    :class:`ConsistencyError` if the two roots are not inverse to each other
    within ``1e-6`` (Frobenius).
    """
    if b.nrows != b.ncols:
        raise ShapeError(f"square matrix required, got {b.shape}")
    n = b.nrows
    res = run(block([[None, b], [identity(n), None]]), cfg)
    s = res.sign
    root = submatrix(s, 0, n, n, 2 * n)
    inv_root = submatrix(s, n, 2 * n, 0, n)
    mismatch = norm(add(matmul(root, inv_root), identity(n), 1.0, -1.0), "frobenius")
    if mismatch > SQRT_CONSISTENCY_TOL:
        raise ConsistencyError(f"||B^(1/2) B^(-1/2) - I||_F = {mismatch:.3e}")
    if return_result:
        return root, inv_root, res
    return root, inv_root


@dataclass(frozen=True)
class AreProblem:
    """``U C + C^T U + Q - U B D^-1 B^T U = 0`` with square ``n x n`` blocks."""

    B: SparseMatrix
    C: SparseMatrix
    D: SparseMatrix
    Q: SparseMatrix

    def __post_init__(self):
        n = self.B.nrows
        for name in "BCDQ":
            m = getattr(self, name)
            if m.shape != (n, n):
                raise ShapeError(f"{name} is {m.shape}, expected ({n}, {n})")

    @property
    def n(self):
        return self.B.nrows

    def gain(self):
        """``G = B D^-1 B^T``, symmetrised."""
        return symmetrize(matmul(matmul(self.B, lu_invert(self.D)), transpose(self.B)))


@dataclass
class AreSolution:
    U: SparseMatrix
    equation_error: float
    sign_trace: IterationTrace
    sign_result: Optional[SignResult] = None


def are_residual(p: AreProblem, u: SparseMatrix, gain: Optional[SparseMatrix] = None) -> float:
    """``||U C + C^T U + Q - U G U||_inf`` with ``G = B D^-1 B^T``."""
    if u.shape != (p.n, p.n):
        raise ShapeError(f"U is {u.shape}, expected ({p.n}, {p.n})")
    g = p.gain() if gain is None else gain
    lin = add(matmul(u, p.C), matmul(transpose(p.C), u))
    quad = matmul(matmul(u, g), u)
    return norm(add(add(lin, p.Q), quad, 1.0, -1.0), "inf")


def hamiltonian(p: AreProblem, gain: Optional[SparseMatrix] = None) -> SparseMatrix:
    """``[[C, G], [Q, -C^T]]``."""
    g = p.gain() if gain is None else gain
    return block([[p.C, g], [p.Q, transpose(p.C).scale(-1.0)]])


def are_solve(p: AreProblem, cfg: IterationConfig) -> AreSolution:
    """Solve the Riccati equation from ``S = sign([[C, G], [Q, -C^T]])``.

    With ``S`` partitioned into ``W11 .. W22``, ``U`` solves
    ``W12 U = W11 + I`` (an LU solve, no explicit inverse).
    """
    n = p.n
    g = p.gain()
    res = run(hamiltonian(p, g), cfg)
    s = res.sign
    w11 = submatrix(s, 0, n, 0, n)
    w12 = submatrix(s, 0, n, n, 2 * n)
    try:
        u = lu_solve(w12, add(w11, identity(n)))
    except SingularMatrix as exc:
        raise SingularW12(f"W12 is singular: {exc}") from None
    return AreSolution(U=u, equation_error=are_residual(p, u, g), sign_trace=res.trace,
                       sign_result=res)
