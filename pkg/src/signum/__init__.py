"""Sparse matrix sign function with norm-budgeted filtering.

Newton (``nm``) and Newton-Schulz (``ns``) iterations for ``sign(A)``, their
filtered variants (``nmf``, ``nsf``) that drop small entries under a norm
budget, and two applications: matrix square roots and continuous-time
algebraic Riccati equations.
"""
from __future__ import annotations

from ._backend import BACKEND
from .applications import (AreProblem, AreSolution, are_residual, are_solve, hamiltonian,
                           sqrt_via_sign)
from .errors import (ConsistencyError, Diverged, MatrixMarketError, MaxIterExceeded,
                     NsPreconditionWarning, ShapeError, SignumError, SingularIterate,
                     SingularMatrix, SingularW12, SolverFailure)
from .filtering import FilterReport, FilterSchedule, apply_filter, select_threshold
from .matgen import GenSpec
from .mmio import read_matrix_market, write_matrix_market
from .sign import IterationConfig, IterationTrace, SignResult, dense_sign_oracle, run, sign
from .sparse import SparseMatrix, identity, lu_invert, matmul, norm

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AreProblem", "AreSolution", "are_residual", "are_solve", "hamiltonian",
    "sqrt_via_sign", "ConsistencyError", "Diverged", "MatrixMarketError", "MaxIterExceeded",
    "NsPreconditionWarning", "ShapeError", "SignumError", "SingularIterate", "SingularMatrix",
    "SingularW12", "SolverFailure", "FilterReport", "FilterSchedule", "apply_filter",
    "select_threshold", "GenSpec", "read_matrix_market", "write_matrix_market",
    "IterationConfig", "IterationTrace", "SignResult", "dense_sign_oracle", "run", "sign",
    "SparseMatrix", "identity", "lu_invert", "matmul", "norm",
]
