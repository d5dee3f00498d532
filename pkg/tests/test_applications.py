from __future__ import annotations

import numpy as np
import pytest

from signum.applications import (AreProblem, are_residual, are_solve, hamiltonian,
                                 sqrt_via_sign, symmetrize)
from signum.errors import ConsistencyError, ShapeError, SingularW12
from signum.matgen import gen_are_pair, gen_dispersion, gen_rand_spd
from signum.sign import METHODS, IterationConfig
from signum.sparse import add, diag, from_dense, identity, matmul, norm, submatrix, transpose, zeros

pytestmark = pytest.mark.filterwarnings("ignore::signum.errors.NsPreconditionWarning")


def scalar(v):
    return diag([float(v)])


# -- square root -----------------------------------------------------------

@pytest.mark.parametrize("method", METHODS)
def test_sqrt_scalar(method):
    root, inv = sqrt_via_sign(scalar(4.0), IterationConfig(method=method))
    assert root.to_dense()[0, 0] == pytest.approx(2.0, abs=1e-12)
    assert inv.to_dense()[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_sqrt_identity():
    root, inv = sqrt_via_sign(identity(4), IterationConfig(method="nm"))
    np.testing.assert_allclose(root.to_dense(), np.eye(4), atol=1e-14)
    np.testing.assert_allclose(inv.to_dense(), np.eye(4), atol=1e-14)


@pytest.mark.parametrize("method", METHODS)
def test_sqrt_spd_matches_eigendecomposition(method):
    b = gen_rand_spd(40, 0.1, 3)
    root, inv, res = sqrt_via_sign(b, IterationConfig(method=method), return_result=True)
    w, v = np.linalg.eigh(b.to_dense())
    np.testing.assert_allclose(root.to_dense(), (v * np.sqrt(w)) @ v.T, atol=1e-9)
    np.testing.assert_allclose(inv.to_dense(), (v / np.sqrt(w)) @ v.T, atol=1e-9)
    # diagonal blocks of the sign vanish
    s = res.sign
    assert norm(submatrix(s, 0, 40, 0, 40)) <= 1e-10
    assert norm(submatrix(s, 40, 80, 40, 80)) <= 1e-10


def test_sqrt_dispersion_small():
    b = gen_dispersion(60)
    root, inv = sqrt_via_sign(b, IterationConfig(method="nsf"))
    assert norm(add(matmul(root, root), b, 1.0, -1.0)) <= 1e-10 * norm(b)


def test_sqrt_consistency_error():
    # eps_tol far too loose: the roots are not yet inverse to each other
    with pytest.raises(ConsistencyError):
        sqrt_via_sign(gen_rand_spd(30, 0.2, 1), IterationConfig(method="nm", eps_tol=0.5))


def test_sqrt_rejects_rectangular():
    with pytest.raises(ShapeError):
        sqrt_via_sign(zeros(2, 3), IterationConfig())


# -- Riccati -----------------------------------------------------------------

def test_are_scalar():
    p = AreProblem(B=scalar(1), C=zeros(1, 1), D=scalar(1), Q=scalar(1))
    sol = are_solve(p, IterationConfig(method="nm"))
    assert sol.U.to_dense()[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert sol.equation_error <= 1e-12


def test_are_zero_q_gives_zero_solution():
    n = 4
    p = AreProblem(B=identity(n), C=identity(n).scale(-1.0), D=identity(n), Q=zeros(n, n))
    sol = are_solve(p, IterationConfig(method="nmf"))
    assert sol.U.nnz == 0
    assert sol.equation_error == 0.0


def test_are_residual_examples():
    p = AreProblem(B=scalar(1), C=zeros(1, 1), D=scalar(1), Q=scalar(1))
    assert are_residual(p, zeros(1, 1)) == norm(p.Q, "inf")
    assert are_residual(p, scalar(1.0)) <= 1e-12
    assert are_residual(p, scalar(1.1)) == pytest.approx(0.21, abs=1e-14)


def test_are_residual_shape_check():
    p = AreProblem(B=scalar(1), C=zeros(1, 1), D=scalar(1), Q=scalar(1))
    with pytest.raises(ShapeError):
        are_residual(p, zeros(2, 2))


def test_problem_shape_check():
    with pytest.raises(ShapeError):
        AreProblem(B=identity(2), C=identity(3), D=identity(2), Q=identity(2))


def test_singular_w12():
    # G = 0 makes the upper-right block of the sign vanish
    n = 3
    p = AreProblem(B=zeros(n, n), C=identity(n).scale(-1.0), D=identity(n), Q=identity(n))
    with pytest.raises(SingularW12):
        are_solve(p, IterationConfig(method="nm"))


def test_hamiltonian_layout():
    p = gen_are_pair(6, 0)
    h = hamiltonian(p).to_dense()
    np.testing.assert_allclose(h[:6, :6], p.C.to_dense())
    np.testing.assert_allclose(h[:6, 6:], p.gain().to_dense())
    np.testing.assert_allclose(h[6:, :6], p.Q.to_dense())
    np.testing.assert_allclose(h[6:, 6:], -p.C.to_dense().T)


@pytest.mark.parametrize("method", METHODS)
def test_are_generated_family(method):
    p = gen_are_pair(60, 11)
    sol = are_solve(p, IterationConfig(method=method, eps_tol=1e-13))
    assert sol.equation_error <= 1e-6
    assert sol.equation_error == are_residual(p, sol.U)
    u = sol.U
    assert norm(add(u, transpose(u), 1.0, -1.0)) <= 1e-6 * norm(u)


def test_are_matches_scipy_care_on_small_problem():
    # independent route: Schur-based solver on the same equation
    from scipy.linalg import solve_continuous_are
    rng = np.random.default_rng(2)
    n = 8
    c = -np.eye(n) + 0.1 * rng.standard_normal((n, n))
    bm = rng.standard_normal((n, n))
    q = np.eye(n)
    p = AreProblem(B=from_dense(bm), C=from_dense(c), D=identity(n), Q=from_dense(q))
    sol = are_solve(p, IterationConfig(method="nm", eps_tol=1e-13))
    # our equation: U C + C^T U + Q - U G U = 0 with G = B B^T
    ref = solve_continuous_are(c, bm, q, np.eye(n))
    assert sol.equation_error <= 1e-8
    np.testing.assert_allclose(sol.U.to_dense(), ref, rtol=0, atol=1e-10)


def test_symmetrize():
    a = from_dense(np.array([[1.0, 2.0], [0.0, 3.0]]))
    np.testing.assert_array_equal(symmetrize(a).to_dense(), [[1, 1], [1, 3]])
