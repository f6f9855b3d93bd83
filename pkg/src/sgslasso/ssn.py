"""Semismooth Newton method for the inner augmented-Lagrangian subproblem.

For fixed multipliers (x, y, z) and penalty sigma, minimizes the smooth
dual-subproblem objective phi(u, vE, vI); the optimal (w, s) pair is
recovered in closed form from the prox maps at the end.
"""

from dataclasses import dataclass

import numpy as np

from .newton import assemble_system, build_active_sets, solve_newton
from .prox import (
    jacobian_orthant,
    jacobian_prox_h,
    jacobian_prox_p,
    project_orthant,
    prox_h,
    prox_p,
)


@dataclass
class SsnParams:
    mu: float = 1e-4  # Armijo slope fraction, in (0, 1/2)
    eta_bar: float = 0.1  # cap of the inexact-solve tolerance, in (0, 1)
    tau: float = 0.2  # superlinear exponent 1 + tau, tau in (0, 1]
    nu1: float = 1e-4  # ridge scale, in (0, 1)
    nu2: float = 1e-2  # ridge cap, in (0, 1)
    ls_delta: float = 0.5  # backtracking ratio, in (0, 1)
    max_newton: int = 100
    max_linesearch: int = 50
    grad_tol: float = 1e-12  # absolute floor on ||grad phi||
    newton_strategy: str = "auto"

    def __post_init__(self):
        if not (0 < self.mu < 0.5):
            raise ValueError("mu must lie in (0, 1/2)")
        for name in ("eta_bar", "nu1", "nu2", "ls_delta"):
            val = getattr(self, name)
            if not (0 < val < 1):
                raise ValueError(f"{name} must lie in (0, 1)")
        if not (0 < self.tau <= 1):
            raise ValueError("tau must lie in (0, 1]")


@dataclass(eq=False)
class InnerState:
    """Point (u, vE, vI) with all prox caches; rebuilt atomically on update."""

    u: np.ndarray
    vE: np.ndarray
    vI: np.ndarray
    phi: float
    grad: np.ndarray
    ph: np.ndarray  # Prox_{sigma h}(y + sigma u)
    pp: np.ndarray  # Prox_{sigma p}(q)
    pr: np.ndarray  # orthant projection of sigma vI - z
    q: np.ndarray  # x - sigma (A*u + BE*vE + BI*vI)
    nt: np.ndarray  # A*u + BE*vE + BI*vI

    @property
    def grad_norm(self):
        return float(np.linalg.norm(self.grad))


def _nsq(v):
    return float(v @ v)


class PhiEvaluator:
    """phi / grad-phi evaluation for fixed multipliers and penalty."""

    def __init__(self, x, y, z, sigma, problem):
        self.x, self.y, self.z = x, y, z
        self.sigma = sigma
        self.problem = problem
        self._const = -(_nsq(x) + _nsq(y) + _nsq(z)) / (2.0 * sigma)

    def _caches(self, u, vE, vI):
        pb, sigma = self.problem, self.sigma
        nt = pb.adjoint_apply(u, vE, vI)
        q = self.x - sigma * nt
        ph = prox_h(self.y + sigma * u, sigma)
        pp, _ = prox_p(q, sigma, pb.groups, pb.params)
        pr = project_orthant(sigma * vI - self.z)
        return nt, q, ph, pp, pr

    def phi_value(self, u, vE, vI):
        pb, sigma = self.problem, self.sigma
        _, _, ph, pp, pr = self._caches(u, vE, vI)
        # the two conjugate-function terms vanish at prox-feasible points
        return (
            (_nsq(ph) + _nsq(pp) + _nsq(pr)) / (2.0 * sigma)
            + float(pb.b @ u)
            + float(pb.cE @ vE)
            + float(pb.cI @ vI)
            + self._const
        )

    def state(self, u, vE, vI):
        pb, sigma = self.problem, self.sigma
        nt, q, ph, pp, pr = self._caches(u, vE, vI)
        phi = (
            (_nsq(ph) + _nsq(pp) + _nsq(pr)) / (2.0 * sigma)
            + float(pb.b @ u)
            + float(pb.cE @ vE)
            + float(pb.cI @ vI)
            + self._const
        )
        bE, bI = pb.apply_constraints(pp)
        grad = np.concatenate([ph - pb.apply_A(pp) + pb.b, -bE + pb.cE, -bI + pr + pb.cI])
        return InnerState(u=u, vE=vE, vI=vI, phi=phi, grad=grad,
                          ph=ph, pp=pp, pr=pr, q=q, nt=nt)

    def recover_ws(self, state):
        """Closed-form (w, s) at the current inner point."""
        sigma = self.sigma
        w = (self.y + sigma * state.u - state.ph) / sigma
        s = (state.q - state.pp) / sigma
        return w, s

    def candidate_multipliers(self, state):
        """Multiplier update the outer loop would take from this state."""
        return state.pp, state.ph, -state.pr


def eval_phi(u, vE, vI, x, y, z, sigma, problem):
    return PhiEvaluator(x, y, z, sigma, problem).phi_value(u, vE, vI)


def eval_grad_phi(u, vE, vI, x, y, z, sigma, problem):
    return PhiEvaluator(x, y, z, sigma, problem).state(u, vE, vI).grad


def hessian_system(evaluator, state, eps):
    """Structured generalized-Hessian element at the given state."""
    pb, sigma = evaluator.problem, evaluator.sigma
    jac_h = jacobian_prox_h(evaluator.y + sigma * state.u, sigma)
    jac_p = jacobian_prox_p(state.q, sigma, pb.groups, pb.params)
    jac_r = jacobian_orthant(sigma * state.vI - evaluator.z)
    active = build_active_sets(jac_p)
    return assemble_system(
        jac_h, jac_p, jac_r, pb.stacked_matrix(), active, sigma, eps
    )


@dataclass
class InnerReport:
    iterations: int
    grad_norms: list
    status: str  # converged | stopped | max_iterations | linesearch_failure


def ssn_minimize(x, y, z, sigma, problem, params=None, stop=None, start=None):
    """Run the semismooth Newton iteration on phi.

    ``stop(state, j)`` is consulted before every Newton step (the outer
    loop's inner-accuracy criteria); ``start`` optionally warm-starts
    (u, vE, vI).  Returns ``(state, w, s, report)``.
    """
    params = params or SsnParams()
    ev = PhiEvaluator(x, y, z, sigma, problem)
    if start is None:
        u = np.zeros(problem.m)
        vE = np.zeros(problem.mE)
        vI = np.zeros(problem.mI)
    else:
        u, vE, vI = (np.asarray(a, float).copy() for a in start)
    state = ev.state(u, vE, vI)
    grad_norms = []
    status = "max_iterations"
    j = 0
    while j < params.max_newton:
        ng = state.grad_norm
        grad_norms.append(ng)
        if not np.isfinite(ng):
            status = "diverged"
            break
        if stop is not None and stop(state, j):
            status = "stopped"
            break
        if ng <= params.grad_tol:
            status = "converged"
            break

        eps_j = params.nu1 * min(params.nu2, ng)
        eta_j = min(params.eta_bar, ng ** (1.0 + params.tau))
        system = hessian_system(ev, state, eps_j)
        delta, _, _ = solve_newton(
            system, -state.grad, strategy=params.newton_strategy, pcg_tol=eta_j
        )
        gd = float(state.grad @ delta)
        if gd >= 0:  # not a descent direction; fall back to steepest descent
            delta = -state.grad
            gd = -ng * ng
        if -gd <= 1e-15 * (1.0 + abs(state.phi)):
            # predicted decrease below float resolution of phi; no further
            # progress is measurable
            status = "converged"
            break

        alpha = 1.0
        accepted = None
        best = None
        for _ in range(params.max_linesearch):
            cand = (state.u + alpha * delta[: problem.m],
                    state.vE + alpha * delta[problem.m : problem.m + problem.mE],
                    state.vI + alpha * delta[problem.m + problem.mE :])
            phi_new = ev.phi_value(*cand)
            if phi_new <= state.phi + params.mu * alpha * gd:
                accepted = cand
                break
            if best is None or phi_new < best[0]:
                best = (phi_new, cand)
            alpha *= params.ls_delta
        if accepted is None:
            if best is not None and best[0] < state.phi:
                accepted = best[1]
            else:
                status = "linesearch_failure"
                break
        state = ev.state(*accepted)
        j += 1
    else:
        grad_norms.append(state.grad_norm)

    w, s = ev.recover_ws(state)
    report = InnerReport(iterations=j, grad_norms=grad_norms, status=status)
    return state, w, s, report
