"""Smoke tests for the Python bindings.

These exercise the binding layer end to end on tiny problems; the numerical
contracts themselves are covered by the C++ test suites.
"""

import numpy as np
import pytest

import smart_transfer as st


def test_svd_roundtrip():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 4))
    s = st.svd(A)
    assert np.allclose(s.U @ np.diag(s.d) @ s.V.T, A, atol=1e-10)
    assert np.all(np.diff(s.d) <= 1e-12)


def test_soft_threshold_matrix():
    A = np.array([[1.5, -0.2], [0.0, -3.0]])
    out = st.soft_threshold(A, 0.5)
    assert np.allclose(out, [[1.0, 0.0], [0.0, -2.5]])


def test_complete_basis_is_orthogonal_completion():
    U0 = np.eye(5)[:, :2]
    W = st.complete_basis(U0)
    full = np.hstack([U0, W])
    assert np.allclose(full.T @ full, np.eye(5), atol=1e-10)


def test_initializers_and_rank():
    rng = np.random.default_rng(1)
    n, p, q, r = 80, 10, 6, 2
    X = rng.standard_normal((n, p))
    C = rng.standard_normal((p, r)) @ rng.standard_normal((r, q))
    Y = X @ C + 0.01 * rng.standard_normal((n, q))
    ols = st.ols_fit(X, Y)
    assert np.linalg.norm(ols - C) / np.linalg.norm(C) < 0.05
    ridge = st.ridge_fit(X, Y, 1e-6)
    assert np.allclose(ridge, ols, atol=1e-3)
    assert st.select_rank(X, Y) == r
    factors = st.warm_start(ols, r)
    assert np.allclose(factors.U.T @ factors.U, np.eye(r), atol=1e-8)


def test_smart_fit_noiseless_recovery():
    rng = np.random.default_rng(2)
    n, p, q, r = 120, 8, 5, 1
    X = rng.standard_normal((n, p))
    u = np.linalg.qr(rng.standard_normal((p, 1)))[0]
    v = np.linalg.qr(rng.standard_normal((q, 1)))[0]
    C_star = 2.0 * u @ v.T
    Y = X @ C_star
    fit = st.smart_fit(X, Y, C_star, r, 0, 0, 1e-4, 1e-4)
    assert st.norm_frob_error(fit.C_hat, C_star) <= 1e-2
    assert fit.converged
    assert fit.factors.coefficient() == pytest.approx(fit.C_hat, abs=1e-10)


def test_solver_config_fields():
    cfg = st.SolverConfig()
    cfg.t_max = 10
    rng = np.random.default_rng(3)
    X = rng.standard_normal((30, 4))
    Y = rng.standard_normal((30, 3))
    fit = st.smart_fit(X, Y, np.zeros((4, 3)), 2, 4, 3, 0.0, 0.0, cfg)
    assert fit.iterations <= 10
