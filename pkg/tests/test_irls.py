"""Reweighted least squares: weights, epsilon schedules, solver oracles."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lpreg.fista import FistaConfig, fista_solve
from lpreg.functional import Penalty, eval_flp
from lpreg.irls import (IrlsConfig, IrlsState, build_penalty_diag,
                        build_residual_diag, eval_surrogate, irls_cg_solve,
                        irls_landweber_solve, irls_weights, update_epsilon)


def tikhonov_direct(a, b, lam):
    n = a.shape[1]
    return np.linalg.solve(a.T @ a + lam * np.eye(n), a.T @ b)


def test_weights_formula_and_positivity():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(30)
    for p in (1.0, 1.3, 1.7):
        w = irls_weights(x, 0.05, p)
        assert np.all(w > 0)
        assert_allclose(w, (x * x + 0.05 ** 2) ** (-(2 - p) / 2), rtol=1e-13)
    # p = 2 is unweighted least squares
    assert_allclose(irls_weights(x, 0.05, 2.0), np.ones(30))


def test_residual_diag_l2_is_identity_weight():
    r = np.array([3.0, -0.5, 0.0])
    assert_allclose(build_residual_diag(r, 2.0), np.ones(3))
    # l < 2 downweights large residuals
    d = build_residual_diag(r, 1.0)
    assert d[0] < d[1]


def test_tikhonov_equivalence():
    rng = np.random.default_rng(1)
    for trial in range(5):
        a = rng.standard_normal((50, 30))
        b = rng.standard_normal(50)
        for lam in (0.01, 0.1, 1.0, 10.0, 100.0):
            pen = Penalty(lam=lam, l=2.0, p=2.0)
            cfg = IrlsConfig(pen=pen, iters=3, inner_iters=60, cg_tol=1e-14)
            x, _ = irls_cg_solve(a, b, cfg)
            assert_allclose(x, tikhonov_direct(a, b, lam), rtol=1e-8, atol=1e-10)


def _kkt_violation(a, b, x, lam, eps_z):
    # components at or below the zero-classification band take the interval
    # test |g| <= lam; the band is sized from the run's final smoothing width
    g = 2.0 * a.T @ (a @ x - b)
    active = np.abs(x) > eps_z
    v_on = np.abs(g[active] + lam * np.sign(x[active]))
    v_off = np.maximum(np.abs(g[~active]) - lam, 0.0)
    parts = [v for v in (v_on, v_off) if v.size]
    return max(float(np.max(v)) for v in parts) if parts else 0.0


def test_l1_kkt_and_fista_agreement():
    rng = np.random.default_rng(2)
    for trial in range(5):
        a = rng.standard_normal((10, 4))
        b = rng.standard_normal(10)
        lam = 0.5 * float(np.max(np.abs(a.T @ b)))
        pen = Penalty(lam=lam, l=2.0, p=1.0)
        xi, tr = irls_cg_solve(a, b, IrlsConfig(pen=pen, iters=200, inner_iters=20,
                                                eps0=0.1, alpha=1e-8))
        xf, _ = fista_solve(a, b, FistaConfig(pen=pen, iters=2000))
        eps_fin = float(tr.values("eps")[-1])
        assert _kkt_violation(a, b, xi, lam, 25 * eps_fin) <= 1e-3 * lam
        assert _kkt_violation(a, b, xf, lam, 1e-9) <= 1e-3 * lam
        fi, ff = eval_flp(a, b, xi, pen), eval_flp(a, b, xf, pen)
        assert abs(fi - ff) <= 1e-3 * max(fi, ff)


def test_eps_schedule_monotone_and_floored():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((20, 15))
    b = rng.standard_normal(20)
    pen = Penalty(lam=0.1, l=2.0, p=1.0)
    for mode in ("fixed", "distance", "surrogate_gap"):
        cfg = IrlsConfig(pen=pen, iters=25, inner_iters=5, eps_mode=mode,
                         eps0=0.5, alpha=0.01, eps_floor=1e-8)
        x, tr = irls_cg_solve(a, b, cfg)
        eps = tr.values("eps")
        assert np.all(np.diff(eps) <= 1e-15)
        assert np.all(eps >= 1e-8 - 1e-18)


def test_update_epsilon_distance_hand():
    pen = Penalty(lam=0.1, l=2.0, p=1.0)
    cfg = IrlsConfig(pen=pen, eps_mode="distance", eps0=0.5, alpha=0.04)
    st = IrlsState(x=np.array([1.0, 0.0]), eps=0.5, iteration=1,
                   prev_x=np.array([0.9, 0.0]))
    # candidate sqrt(||dx|| + alpha) = sqrt(0.1 + 0.04), below current eps
    got = update_epsilon(st, cfg)
    assert_allclose(got, np.sqrt(0.1 + 0.04), rtol=1e-12)
    # never increases
    st2 = IrlsState(x=np.array([9.0, 0.0]), eps=0.2, iteration=1,
                    prev_x=np.zeros(2))
    assert update_epsilon(st2, cfg) <= 0.2


def test_surrogate_majorizes_objective():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((8, 6))
    b = rng.standard_normal(8)
    for p in (1.0, 1.5):
        pen = Penalty(lam=0.3, l=2.0, p=p)
        for _ in range(10):
            x = rng.standard_normal(6)
            eps = 10 ** rng.uniform(-4, -1)
            w = irls_weights(x, eps, p)
            g = eval_surrogate(a, b, x, w, eps, pen)
            f = eval_flp(a, b, x, pen)
            assert g >= f - 1e-10


def test_penalty_diag_positive():
    pen = Penalty(lam=0.8, l=2.0, p=1.0)
    w = irls_weights(np.array([0.5, 0.0, -2.0]), 0.01, 1.0)
    d = build_penalty_diag(w, pen)
    assert np.all(d > 0)


def test_config_validation():
    pen = Penalty(lam=0.1)
    with pytest.raises(ValueError):
        IrlsConfig(pen=pen, eps0=0.0)
    with pytest.raises(ValueError):
        IrlsConfig(pen=pen, alpha=1.5)
    with pytest.raises(ValueError):
        IrlsConfig(pen=pen, eps_mode="nope")
    with pytest.raises(ValueError):
        IrlsConfig(pen=Penalty(lam=0.1, p=1.0), gamma=2.0 / (4 - 1.0) + 0.1)


def test_landweber_agrees_with_tikhonov():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((12, 9)) / 3.0
    b = rng.standard_normal(12)
    pen = Penalty(lam=0.2, l=2.0, p=2.0)
    x, _ = irls_landweber_solve(a, b, IrlsConfig(pen=pen, iters=3000))
    assert_allclose(x, tikhonov_direct(a, b, 0.2), rtol=1e-5, atol=1e-7)
    with pytest.raises(ValueError):
        irls_landweber_solve(a, b, IrlsConfig(pen=Penalty(lam=0.2, l=1.5, p=2.0)))


def test_trace_contract():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((10, 7))
    b = rng.standard_normal(10)
    pen = Penalty(lam=0.05, l=2.0, p=1.0)
    x, tr = irls_cg_solve(a, b, IrlsConfig(pen=pen, iters=4))
    assert len(tr.records) == 4
    for key in ("iter", "F", "residual_norm_l", "penalty_norm_p", "eps", "nnz"):
        assert key in tr.records[0]
    # objective is recorded consistently with the returned solution
    assert_allclose(tr.records[-1]["F"], eval_flp(a, b, x, pen), rtol=1e-10)
