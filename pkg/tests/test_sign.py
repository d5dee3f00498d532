from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signum.errors import Diverged, MaxIterExceeded, NsPreconditionWarning, SingularIterate
from signum.filtering import FilterSchedule
from signum.matgen import gen_dispersion, gen_rand_sparse, gen_rand_spd, sqrt_embedding
from signum.sign import (METHODS, IterationConfig, OracleFailure, dense_sign_oracle, newton_schulz_step,
                         newton_step, residual, run)
from signum.sparse import add, diag, from_dense, identity, matmul, norm, zeros


def quiet_run(a, cfg, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NsPreconditionWarning)
        return run(a, cfg, **kw)


# -- single steps ------------------------------------------------------------

def test_newton_step_examples():
    np.testing.assert_array_equal(newton_step(diag([2.0])).to_dense(), [[1.25]])
    np.testing.assert_array_equal(newton_step(identity(3)).to_dense(), np.eye(3))
    np.testing.assert_allclose(newton_step(diag([2.0, -3.0])).to_dense(),
                               np.diag([1.25, -5.0 / 3.0]), rtol=1e-15)


def test_newton_step_singular():
    with pytest.raises(SingularIterate):
        newton_step(zeros(2, 2))


def test_newton_schulz_step_examples():
    np.testing.assert_array_equal(newton_schulz_step(diag([0.5])).to_dense(), [[0.6875]])
    np.testing.assert_array_equal(newton_schulz_step(identity(3)).to_dense(), np.eye(3))
    np.testing.assert_array_equal(newton_schulz_step(diag([1.0, -1.0])).to_dense(),
                                  np.diag([1.0, -1.0]))


def test_residual_examples():
    assert residual(identity(4)) == 0.0
    assert residual(diag([2.0])) == 3.0
    assert residual(from_dense(np.array([[0.0, 1.0], [1.0, 0.0]]))) == 0.0


# -- config ----------------------------------------------------------------------

@pytest.mark.parametrize("kw", [{"method": "halley"}, {"eps_tol": 0.0}, {"max_iter": 0},
                                {"norm_kind": "inf"}, {"on_stagnation": "ignore"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        IterationConfig(**kw)


def test_default_schedule_follows_config():
    s = IterationConfig(method="nmf", eps_tol=1e-10).filter_schedule()
    assert s == FilterSchedule(eps_tol=1e-10)


# -- run ---------------------------------------------------------------------

@pytest.mark.parametrize("method", METHODS)
def test_run_diagonal(method):
    a = diag([5.0, -2.0, 0.3, -0.4])
    r = quiet_run(a, IterationConfig(method=method, eps_tol=1e-12))
    assert r.converged and r.status == "converged"
    np.testing.assert_allclose(r.sign.to_dense(), np.diag([1.0, -1.0, 1.0, -1.0]), atol=1e-12)
    assert r.final_residual <= 1e-12


@pytest.mark.parametrize("method", METHODS)
def test_run_identity_needs_no_steps(method):
    r = run(identity(5), IterationConfig(method=method))
    assert r.converged and r.iterations == 0 and len(r.trace) == 0
    assert r.final_residual == 0.0


def test_trace_bookkeeping():
    a = gen_rand_sparse(60, 0.05, 3)
    r = run(a, IterationConfig(method="nmf"))
    assert len(r.trace) == r.iterations <= 100
    res = r.trace.residuals()
    assert res[0] == r.trace.initial_residual and res[-1] == r.final_residual
    assert all(e >= 0.0 for e in res)
    assert [s.k for s in r.trace] == list(range(1, r.iterations + 1))
    assert len(r.trace.filter_reports()) == r.iterations
    assert all(s.nnz == s_nnz for s, s_nnz in zip(r.trace, [s.nnz for s in r.trace]))
    assert r.trace.steps[-1].nnz == r.sign.nnz


def test_unfiltered_runs_have_no_reports():
    r = run(gen_rand_sparse(40, 0.1, 0), IterationConfig(method="nm"))
    assert r.trace.filter_reports() == []
    assert all(s.threshold == 0.0 and s.dropped_count == 0 for s in r.trace)


def test_max_iter_carries_partial_result():
    with pytest.raises(MaxIterExceeded) as info:
        run(gen_rand_sparse(40, 0.1, 0), IterationConfig(method="nm", max_iter=2))
    res = info.value.result
    assert res.iterations == 2 and not res.converged and res.status == "max_iter"


def test_singular_input():
    with pytest.raises(SingularIterate):
        run(zeros(3, 3), IterationConfig(method="nm"))


def test_ns_outside_convergence_region_diverges():
    with pytest.raises(Diverged) as info:
        quiet_run(diag([3.0, 1.0]), IterationConfig(method="ns", prescale=False))
    assert info.value.result.status == "diverged"


def test_ns_precondition_warning():
    # ||I - A^2||_F = 1.46 yet both eigenvalues lie inside (0, sqrt 3)
    with pytest.warns(NsPreconditionWarning):
        r = run(diag([1.5, 0.5]), IterationConfig(method="ns", prescale=False))
    assert r.converged and r.warnings


def test_prescale_brings_ns_into_region():
    with warnings.catch_warnings():
        warnings.simplefilter("error", NsPreconditionWarning)
        r = run(diag([3.0, 1.0]), IterationConfig(method="ns"))
    assert r.converged and r.scale == 3.0


def test_no_warning_inside_region():
    with warnings.catch_warnings():
        warnings.simplefilter("error", NsPreconditionWarning)
        r = run(diag([0.9, -1.1]), IterationConfig(method="nsf"))
    assert r.converged and r.scale == 1.0


def test_newton_is_not_prescaled_by_default():
    assert run(diag([30.0, -0.2]), IterationConfig(method="nm")).scale == 1.0


def test_stagnation_stops_at_rounding_floor():
    a = sqrt_embedding(gen_dispersion(40))
    r = run(a, IterationConfig(method="nm", eps_tol=1e-30))
    assert r.status == "stagnated" and not r.converged
    assert r.final_residual < 1e-10
    e = r.trace.residuals()
    assert e[-2] < 1e-6 and e[-1] > 0.5 * e[-2]


def test_stagnation_can_be_disabled():
    a = sqrt_embedding(gen_dispersion(40))
    with pytest.raises(MaxIterExceeded):
        run(a, IterationConfig(method="nm", eps_tol=1e-30, max_iter=30, on_stagnation="continue"))


def test_callback_sees_every_step():
    seen = []
    a = gen_rand_spd(50, 0.05, 1)
    r = quiet_run(a, IterationConfig(method="nsf"), callback=lambda s: seen.append(s))
    assert [s.k for s in seen] == list(range(1, r.iterations + 1))
    last = seen[-1]
    assert last.x is r.sign
    assert norm(last.residual_matrix) == last.residual
    for s in seen:
        dropped = add(s.x_unfiltered, s.x, 1.0, -1.0)
        assert norm(dropped) == pytest.approx(s.filter_report.dropped_norm, rel=1e-12, abs=0)


@pytest.mark.parametrize("method", METHODS)
def test_commutes_and_is_involution(method):
    a = gen_rand_spd(120, 0.03, 7)
    r = quiet_run(a, IterationConfig(method=method))
    s = r.sign
    assert norm(add(identity(120), matmul(s, s), 1.0, -1.0)) <= 1e-12
    comm = norm(add(matmul(a, s), matmul(s, a), 1.0, -1.0))
    assert comm <= 1e-8 * norm(a) * norm(s)
    np.testing.assert_allclose(s.to_dense(), np.eye(120), atol=1e-12)


def test_norm_one_configuration():
    r = run(gen_rand_sparse(60, 0.05, 4), IterationConfig(method="nmf", norm_kind="one"))
    assert r.converged
    assert norm(add(identity(60), matmul(r.sign, r.sign), 1.0, -1.0), "one") <= 1e-12
    assert all(rep.dropped_norm <= rep.budget for rep in r.trace.filter_reports())


@given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=8),
       st.lists(st.booleans(), min_size=8, max_size=8), st.sampled_from(METHODS))
def test_scalar_diagonals(mags, negs, method):
    vals = np.array(mags) * np.where(negs[:len(mags)], -1.0, 1.0)
    r = quiet_run(diag(vals), IterationConfig(method=method))
    np.testing.assert_allclose(r.sign.diagonal(), np.sign(vals), atol=1e-12)


# -- dense oracle --------------------------------------------------------------

def test_oracle_examples():
    np.testing.assert_allclose(dense_sign_oracle(np.diag([4.0, -9.0])), np.diag([1.0, -1.0]))
    np.testing.assert_allclose(dense_sign_oracle(np.array([[0.0, 2.0], [2.0, 0.0]])),
                               [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(dense_sign_oracle(np.eye(3)), np.eye(3))


def test_oracle_nonsymmetric_path():
    d = np.array([[2.0, 5.0], [0.0, -1.0]])
    s = dense_sign_oracle(d)
    np.testing.assert_allclose(s @ s, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(s @ d, d @ s, atol=1e-12)


def test_oracle_rejects_zero_eigenvalue_and_large_input():
    with pytest.raises(OracleFailure):
        dense_sign_oracle(np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        dense_sign_oracle(np.eye(201))


# floor on ||I - X^2||_F from rounding in one product: a few ulps per entry
def _rounding_floor(x):
    return 64 * np.finfo(float).eps * np.sqrt(x.nrows) * max(norm(x) ** 2 / x.nrows, 1.0)


@pytest.mark.parametrize("method", ["nm", "ns"])
@pytest.mark.parametrize("seed", range(3))
def test_quadratic_contraction_above_rounding_floor(method, seed):
    a = sqrt_embedding(gen_dispersion(60 + 20 * seed))
    r = quiet_run(a, IterationConfig(method=method))
    e = r.trace.residuals()
    floor = _rounding_floor(r.sign)
    steps = [k for k in range(len(e) - 1) if e[k] <= 0.5 and e[k] ** 2 > floor]
    assert steps
    for k in steps:
        assert e[k + 1] <= e[k] ** 2
