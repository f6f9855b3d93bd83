import numpy as np
import pytest

from conftest import small_problem
from oracles import admm_one_step_oracle
from sgslasso.admm import AdmmFactorization, AdmmParams, admm_solve, factorize_M
from sgslasso.alm import PrimalDualPoint
from sgslasso.problems import Problem
from sgslasso.prox import GroupPartition, PenaltyParams


def test_admm_params_validation():
    with pytest.raises(ValueError):
        AdmmParams(sigma=0.0)
    with pytest.raises(ValueError):
        AdmmParams(tau=1.7)
    with pytest.raises(ValueError):
        AdmmParams(tau=0.0)
    with pytest.raises(ValueError):
        AdmmParams(tau_tilde=-1.0)


def test_factorization_spd_and_counts():
    prob = small_problem(seed=1, m=15, n=60, mE=2, mI=2, J=8)
    params = AdmmParams()
    factor = factorize_M(prob, params)
    assert factor.factor_count == 1
    # M must act as a symmetric positive definite map
    rng = np.random.default_rng(0)
    d = rng.standard_normal(prob.m_hat)
    sol = factor.solve(d)
    assert factor.solve_count == 1
    N = np.asarray(prob.stacked_matrix().todense()) if hasattr(
        prob.stacked_matrix(), "todense") else prob.stacked_matrix()
    shift = np.ones(prob.m_hat)
    shift[prob.m : prob.m + prob.mE] = params.tau_tilde / params.sigma**2
    M = N @ N.T + np.diag(shift)
    np.testing.assert_allclose(M @ sol, d, atol=1e-8)


def test_factorization_rejects_zero_tau_tilde_with_equalities():
    prob = small_problem(seed=1, m=15, n=60, mE=2, mI=2, J=8)
    with pytest.raises(ValueError):
        AdmmFactorization(prob, AdmmParams(tau_tilde=0.0))


def test_one_step_matches_scripted_oracle():
    # tau = 1 single iteration from the zero start on a hand-sized problem
    rng = np.random.default_rng(42)
    A = rng.standard_normal((2, 3))
    b = rng.standard_normal(2)
    gp = GroupPartition([[0, 1], [2]])
    prob = Problem(
        A=A, b=b, groups=gp, params=PenaltyParams(0.2, 0.1),
        BE=np.array([[1.0, 1.0, 0.0]]), cE=np.array([0.3]),
        BI=np.array([[0.0, 1.0, 1.0]]), cI=np.array([-0.2]),
    )
    params = AdmmParams(sigma=1.0, tau=1.0, tau_tilde=1.0, max_iter=1,
                        check_every=1)
    start = PrimalDualPoint.zeros(prob)
    point, _ = admm_solve(prob, params, start=start)
    zeros = (start.x, start.y, start.z, start.u, start.vE, start.vI,
             start.w, start.s)
    ox, oy, oz, ou, ovE, ovI, ow, os_ = admm_one_step_oracle(
        prob, 1.0, 1.0, 1.0, zeros
    )
    np.testing.assert_allclose(point.u, ou, atol=1e-12)
    np.testing.assert_allclose(point.vE, ovE, atol=1e-12)
    np.testing.assert_allclose(point.vI, ovI, atol=1e-12)
    np.testing.assert_allclose(point.w, ow, atol=1e-12)
    np.testing.assert_allclose(point.s, os_, atol=1e-8)
    np.testing.assert_allclose(point.x, ox, atol=1e-8)
    np.testing.assert_allclose(point.y, oy, atol=1e-12)
    np.testing.assert_allclose(point.z, oz, atol=1e-12)


def test_admm_converges_and_reports():
    prob = small_problem(seed=3, m=20, n=80, mE=2, mI=2, J=8)
    seen = []
    point, report = admm_solve(
        prob, AdmmParams(tol=1e-6), callback=lambda it, kkt, sig, nt: seen.append(it)
    )
    assert report.converged
    assert report.eta < 1e-6
    assert report.termination == "converged"
    assert all(it % 10 == 0 for it in seen)  # checks happen every 10 iterations
    bE, bI = prob.apply_constraints(point.x)
    assert np.linalg.norm(bE - prob.cE) < 1e-3


def test_admm_max_iter_termination():
    prob = small_problem(seed=3, m=20, n=80, mE=2, mI=2, J=8)
    _, report = admm_solve(prob, AdmmParams(tol=1e-14, max_iter=20))
    assert report.termination == "max_iter"
    assert report.iterations == 20


def test_admm_factor_reuse():
    prob = small_problem(seed=5, m=15, n=60, mE=2, mI=2, J=8)
    params = AdmmParams(tol=1e-6)
    factor = factorize_M(prob, params)
    _, rep1 = admm_solve(prob, params, factor=factor)
    _, rep2 = admm_solve(prob, params, factor=factor)
    assert factor.factor_count == 1
    assert rep1.converged and rep2.converged
