import numpy as np
import pytest

from conftest import small_problem
from sgslasso.admm import AdmmParams, admm_solve
from sgslasso.alm import (
    AlmParams,
    PrimalDualPoint,
    alm_solve,
    check_inner_stop,
    compute_kkt_residuals,
    count_nnz,
)
from sgslasso.problems import Problem
from sgslasso.prox import GroupPartition, PenaltyParams
from sgslasso.ssn import SsnParams


def test_alm_params_validation():
    with pytest.raises(ValueError):
        AlmParams(sigma0=0.0)
    with pytest.raises(ValueError):
        AlmParams(rho=0.5)
    with pytest.raises(ValueError):
        AlmParams(tol=0.0)


def test_count_nnz_prefix_sum_oracle():
    x = np.zeros(201)
    x[0] = 1.0
    x[1:] = 1e-6
    # brute-force prefix sums over sorted magnitudes
    mags = np.sort(np.abs(x))[::-1]
    target = 0.9999 * mags.sum()
    k = next(i + 1 for i in range(mags.size) if mags[: i + 1].sum() >= target)
    assert count_nnz(x) == k
    assert count_nnz(np.zeros(5)) == 0
    assert count_nnz(np.array([0.0, 2.0])) == 1


def test_kkt_residuals_zero_at_manufactured_solution():
    # with lam2 >= ||A^T b||_inf / ||b|| the zero vector solves the
    # unconstrained problem and every KKT quantity is available in closed form
    rng = np.random.default_rng(0)
    A = rng.standard_normal((8, 20))
    b = rng.standard_normal(8)
    bound = np.max(np.abs(A.T @ b)) / np.linalg.norm(b)
    gp = GroupPartition.contiguous(20, 4)
    prob = Problem(A=A, b=b, groups=gp, params=PenaltyParams(0.1, 1.1 * bound))
    nb = np.linalg.norm(b)
    point = PrimalDualPoint(
        x=np.zeros(20), y=-b, z=np.zeros(0), u=-b / nb, vE=np.zeros(0),
        vI=np.zeros(0), w=-b / nb, s=A.T @ b / nb,
    )
    kkt = compute_kkt_residuals(point, prob)
    assert kkt.eta <= 1e-10
    assert kkt.RG <= 1e-10


def test_check_inner_stop_criteria():
    params = AlmParams(eps_c=0.1, delta_c=0.1, deltap_c=0.5)
    # k=2, sigma=2: A threshold = 0.1/4/2 * scale
    assert check_inner_stop(0.01, 1.0, 2.0, 2, "A", params, mult_scale=1.0)
    assert not check_inner_stop(0.02, 1.0, 2.0, 2, "A", params, mult_scale=1.0)
    # B: 0.1/4/2 * delta
    assert check_inner_stop(0.01, 1.0, 2.0, 2, "B", params)
    assert not check_inner_stop(0.013, 1.0, 2.0, 2, "B", params)
    # B': 0.5/2/(2*2) * delta
    assert check_inner_stop(0.06, 1.0, 2.0, 2, "Bprime", params)
    assert not check_inner_stop(0.07, 1.0, 2.0, 2, "Bprime", params)
    with pytest.raises(ValueError):
        check_inner_stop(0.0, 1.0, 1.0, 1, "C", params)


@pytest.mark.parametrize("family,mE,mI", [(1, 3, 3), (2, 3, 0), (3, 1, 0)])
def test_alm_converges_all_families(family, mE, mI):
    prob = small_problem(seed=7, family=family, m=25, n=100, mE=mE, mI=mI, J=12)
    point, report = alm_solve(prob, AlmParams(tol=1e-6))
    assert report.converged
    assert report.eta < 1e-6
    # primal constraints hold to the residual scale
    bE, bI = prob.apply_constraints(point.x)
    assert np.linalg.norm(bE - prob.cE) < 1e-4
    assert np.all(bI - prob.cI > -1e-4)


def test_alm_matches_long_admm_unconstrained():
    # no constraints: plain square-root sparse group Lasso; objectives of
    # the two solvers must agree once both are tight
    prob = small_problem(seed=11, family=2, m=20, n=80, mE=0, mI=0, J=8)
    _, rep_alm = alm_solve(prob, AlmParams(tol=1e-9))
    _, rep_admm = admm_solve(prob, AdmmParams(tol=1e-10, max_iter=200000))
    assert rep_alm.converged and rep_admm.converged
    rel = abs(rep_alm.pobj - rep_admm.pobj) / (1 + abs(rep_alm.pobj))
    assert rel < 1e-6


def test_alm_callback_and_histories():
    prob = small_problem(seed=13, m=20, n=80, mE=2, mI=2, J=8)
    seen = []
    point, report = alm_solve(
        prob, AlmParams(tol=1e-6), callback=lambda k, kkt, sig, nt: seen.append(k)
    )
    assert seen == list(range(1, report.iterations + 1))
    assert len(report.eta_history) == report.iterations
    assert report.eta_history[-1] == report.eta
    assert report.nnz == pytest.approx(count_nnz(point.x))


def test_alm_max_outer_termination():
    prob = small_problem(seed=17, m=20, n=80, mE=2, mI=2, J=8)
    _, report = alm_solve(prob, AlmParams(tol=1e-14, max_outer=2))
    assert report.termination == "max_outer"
    assert not report.converged
    assert report.iterations == 2


def test_alm_immediate_convergence_at_solution():
    prob = small_problem(seed=19, m=20, n=80, mE=2, mI=2, J=8)
    point, report = alm_solve(prob, AlmParams(tol=1e-6))
    point2, report2 = alm_solve(prob, AlmParams(tol=1e-6), start=point)
    assert report2.converged
    assert report2.iterations == 0
