"""Semi-proximal ADMM on the dual problem with one cached factorization."""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .alm import PrimalDualPoint, SolveReport, compute_kkt_residuals, count_nnz
from .linalg import CallableOperator, PcgOptions, pcg_solve
from .prox import prox_h_conjugate, prox_p_conjugate

DENSE_FACTOR_MAX_DIM = 4000


@dataclass
class AdmmParams:
    sigma: float = 1.0  # fixed penalty
    tau: float = 1.618  # multiplier step, in (0, (1+sqrt(5))/2)
    tau_tilde: float = 1.0  # proximal weight on the vE block, >= 0
    max_iter: int = 10000
    tol: float = 1e-6
    check_every: int = 10
    time_cap: float = float("inf")

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not (0 < self.tau < (1 + np.sqrt(5)) / 2):
            raise ValueError("tau must lie in (0, (1+sqrt(5))/2)")
        if self.tau_tilde < 0:
            raise ValueError("tau_tilde must be nonnegative")


class AdmmFactorization:
    """Cached solver for M = N N^T + blockdiag(I, tau_tilde/sigma^2 I, I)."""

    def __init__(self, problem, params):
        self.problem = problem
        self.params = params
        self.solve_count = 0
        self.factor_count = 0
        m_hat = problem.m_hat
        self._shift = np.ones(m_hat)
        if problem.mE:
            self._shift[problem.m : problem.m + problem.mE] = (
                params.tau_tilde / params.sigma**2
            )
            if params.tau_tilde == 0:
                raise ValueError("tau_tilde must be positive when mE > 0")
        N = problem.stacked_matrix()
        self._dense = m_hat <= DENSE_FACTOR_MAX_DIM
        if self._dense:
            NNt = (N @ N.T).toarray() if sp.issparse(N) else N @ N.T
            M = NNt + np.diag(self._shift)
            self.M = 0.5 * (M + M.T)
            import scipy.linalg

            try:
                self._chol = scipy.linalg.cho_factor(self.M, check_finite=False)
            except scipy.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError(str(exc)) from exc
        else:
            diag = np.asarray((N.multiply(N)).sum(axis=1)).ravel() if sp.issparse(N) \
                else np.einsum("ij,ij->i", N, N)
            self._precond = diag + self._shift
            self._op = CallableOperator(
                (m_hat, m_hat),
                lambda d: problem.stacked_apply(problem.adjoint_apply(*problem.split(d)))
                + self._shift * d,
            )
        self.factor_count += 1

    def solve(self, rhs):
        self.solve_count += 1
        if self._dense:
            import scipy.linalg

            return scipy.linalg.cho_solve(self._chol, rhs, check_finite=False)
        opts = PcgOptions(max_iter=2 * self.problem.m_hat, tol=1e-10,
                          preconditioner=self._precond)
        sol, _, _ = pcg_solve(self._op, rhs, opts)
        return sol


def factorize_M(problem, params):
    return AdmmFactorization(problem, params)


def admm_solve(problem, params=None, start=None, callback=None, factor=None):
    """Run the semi-proximal ADMM; returns ``(PrimalDualPoint, SolveReport)``.

    ``factor`` allows reusing a cached factorization across a warm-started
    sweep at fixed (sigma, tau_tilde).
    """
    params = params or AdmmParams()
    factor = factor or factorize_M(problem, params)
    pb = problem
    sigma, tau = params.sigma, params.tau
    point = start or PrimalDualPoint.zeros(pb)
    x, y, z = point.x.copy(), point.y.copy(), point.z.copy()
    u, vE, vI = point.u.copy(), point.vE.copy(), point.vI.copy()
    w, s = point.w.copy(), point.s.copy()
    vI_hat = np.minimum(vI - z / sigma, 0.0)

    report = SolveReport(solver="admm")
    t0 = time.perf_counter()
    kkt = None
    for it in range(1, params.max_iter + 1):
        shifted = s - x / sigma
        a_sh = pb.apply_A(shifted)
        bE_sh, bI_sh = pb.apply_constraints(shifted)
        rhs = np.concatenate([
            -a_sh + (w - y / sigma) - pb.b / sigma,
            -bE_sh + params.tau_tilde / sigma**2 * vE - pb.cE / sigma,
            -bI_sh + (vI_hat + z / sigma) - pb.cI / sigma,
        ])
        sol = factor.solve(rhs)
        u, vE, vI = pb.split(sol)
        vI_hat = np.minimum(vI - z / sigma, 0.0)
        w = prox_h_conjugate(y / sigma + u, sigma)
        nt = pb.adjoint_apply(u, vE, vI)
        s = prox_p_conjugate(x / sigma - nt, sigma, pb.groups, pb.params)
        x = x - tau * sigma * (nt + s)
        y = y - tau * sigma * (w - u)
        z = z - tau * sigma * (vI - vI_hat)

        report.iterations = it
        if it % params.check_every == 0 or it == params.max_iter:
            point = PrimalDualPoint(x=x, y=y, z=z, u=u, vE=vE, vI=vI, w=w, s=s)
            kkt = compute_kkt_residuals(point, pb)
            report.absorb(kkt)
            if callback is not None:
                callback(it, kkt, sigma, 0)
            if kkt.eta < params.tol:
                report.termination = "converged"
                report.converged = True
                break
            if time.perf_counter() - t0 > params.time_cap:
                report.termination = "time_cap"
                break
    else:
        report.termination = "max_iter"

    point = PrimalDualPoint(x=x, y=y, z=z, u=u, vE=vE, vI=vI, w=w, s=s)
    if kkt is None:
        kkt = compute_kkt_residuals(point, pb)
        report.absorb(kkt)
    report.nnz = count_nnz(x)
    report.wall_time = time.perf_counter() - t0
    return point, report
