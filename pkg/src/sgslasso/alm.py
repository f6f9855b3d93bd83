"""Outer augmented Lagrangian loop, KKT residuals, and solve reporting."""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .prox import penalty_value, prox_h_conjugate, prox_p_conjugate
from .ssn import PhiEvaluator, SsnParams, ssn_minimize


@dataclass
class PrimalDualPoint:
    """Full KKT variable set (x, y, z primal-side; u, vE, vI, w, s dual)."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    u: np.ndarray
    vE: np.ndarray
    vI: np.ndarray
    w: np.ndarray
    s: np.ndarray

    @classmethod
    def zeros(cls, problem):
        return cls(
            x=np.zeros(problem.n),
            y=np.zeros(problem.m),
            z=np.zeros(problem.mI),
            u=np.zeros(problem.m),
            vE=np.zeros(problem.mE),
            vI=np.zeros(problem.mI),
            w=np.zeros(problem.m),
            s=np.zeros(problem.n),
        )


@dataclass
class KktResiduals:
    RP: float
    RD: float
    RC: float
    RG: float
    eta: float
    pobj: float
    dobj: float


def compute_kkt_residuals(point, problem):
    """Normalized primal/dual feasibility, complementarity and gap."""
    pb = problem
    x, y, z = point.x, point.y, point.z
    u, vE, vI, w, s = point.u, point.vE, point.vI, point.w, point.s

    bE, bI = pb.apply_constraints(x)
    rp_num = (
        np.linalg.norm(pb.apply_A(x) - y - pb.b)
        + np.linalg.norm(bE - pb.cE)
        + np.linalg.norm(bI - pb.cI + z)
    )
    RP = rp_num / (1.0 + np.linalg.norm(pb.b) + np.linalg.norm(pb.cE) + np.linalg.norm(pb.cI))

    rd_num = np.linalg.norm(pb.adjoint_apply(u, vE, vI) + s) + np.linalg.norm(w - u)
    RD = rd_num / (
        1.0
        + np.linalg.norm(u)
        + np.linalg.norm(vE)
        + np.linalg.norm(vI)
        + np.linalg.norm(s)
        + np.linalg.norm(w)
    )

    # complementarity uses the unit-parameter conjugate proxes
    rc_num = np.linalg.norm(w - prox_h_conjugate(w + y, 1.0)) + np.linalg.norm(
        s - prox_p_conjugate(s + x, 1.0, pb.groups, pb.params)
    )
    if pb.mI:
        rc_num += np.linalg.norm(vI - np.minimum(bI - pb.cI + vI, 0.0))
    RC = rc_num / (1.0 + np.linalg.norm(w) + np.linalg.norm(s) + np.linalg.norm(vI))

    pobj = float(np.linalg.norm(pb.apply_A(x) - pb.b)) + penalty_value(
        x, pb.groups, pb.params
    )
    # conjugate indicator terms are zero at prox-feasible dual points
    dobj = -(float(pb.b @ u) + float(pb.cE @ vE) + float(pb.cI @ vI))
    RG = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    eta = max(RP, RD, RC)
    return KktResiduals(RP=float(RP), RD=float(RD), RC=float(RC), RG=float(RG),
                        eta=float(eta), pobj=pobj, dobj=float(dobj))


def count_nnz(x, threshold=0.9999):
    """Smallest k with the top-k magnitudes holding ``threshold`` of ||x||_1."""
    total = np.abs(x).sum()
    if total == 0:
        return 0
    mags = np.sort(np.abs(x))[::-1]
    csum = np.cumsum(mags)
    return int(np.searchsorted(csum, threshold * total) + 1)


@dataclass
class AlmParams:
    sigma0: float = 1.0
    rho: float = 1.3  # penalty growth factor, >= 1
    sigma_cap: float = 1e6
    tol: float = 1e-6
    max_outer: int = 200
    eps_c: float = 0.1  # eps_k = eps_c / k^2 (summable)
    delta_c: float = 0.1  # delta_k = delta_c / k^2 (summable)
    deltap_c: float = 0.5  # delta'_k = deltap_c / k (vanishing)
    easy_inner_steps: int = 3  # grow sigma when the inner solve was this cheap
    time_cap: float = float("inf")

    def __post_init__(self):
        if self.sigma0 <= 0 or self.rho < 1 or self.tol <= 0:
            raise ValueError("require sigma0 > 0, rho >= 1, tol > 0")


@dataclass
class SolveReport:
    solver: str
    iterations: int = 0
    newton_iterations: int = 0
    eta_history: list = field(default_factory=list)
    RP: float = np.inf
    RD: float = np.inf
    RC: float = np.inf
    RG: float = np.inf
    eta: float = np.inf
    pobj: float = np.nan
    dobj: float = np.nan
    wall_time: float = 0.0
    nnz: int = 0
    termination: str = "running"
    converged: bool = False

    def absorb(self, kkt):
        self.RP, self.RD, self.RC, self.RG = kkt.RP, kkt.RD, kkt.RC, kkt.RG
        self.eta = kkt.eta
        self.pobj, self.dobj = kkt.pobj, kkt.dobj
        self.eta_history.append(kkt.eta)


def check_inner_stop(grad_norm, mult_delta, sigma, k, criterion, params=None,
                     mult_scale=1.0):
    """Inner-accuracy tests gauged by the gradient norm.

    ``mult_delta`` is the norm of the multiplier change the current inner
    point would induce.  Criteria A and B use the practical gradient-norm
    surrogates (the duality-gap quantities they are stated with are not
    observable); B' is the literal test.
    """
    params = params or AlmParams()
    if criterion == "A":
        return grad_norm <= params.eps_c / (k * k) / sigma * max(1.0, mult_scale)
    if criterion == "B":
        return grad_norm <= params.delta_c / (k * k) / sigma * mult_delta
    if criterion == "Bprime":
        return grad_norm <= params.deltap_c / k / (2.0 * sigma) * mult_delta
    raise ValueError("criterion must be 'A', 'B' or 'Bprime'")


def alm_solve(problem, params=None, ssn_params=None, start=None, callback=None):
    """Augmented Lagrangian method on the dual, inner solves by ssn_minimize.

    Returns ``(PrimalDualPoint, SolveReport)``.  ``callback(k, kkt, sigma,
    newton_steps)`` is invoked once per outer iteration.
    """
    params = params or AlmParams()
    ssn_params = ssn_params or SsnParams()
    point = start or PrimalDualPoint.zeros(problem)
    report = SolveReport(solver="ssnal")
    sigma = params.sigma0
    t0 = time.perf_counter()

    kkt = compute_kkt_residuals(point, problem)
    if kkt.eta < params.tol:
        report.absorb(kkt)
        report.termination = "converged"
        report.converged = True
        report.nnz = count_nnz(point.x)
        report.wall_time = time.perf_counter() - t0
        return point, report

    for k in range(1, params.max_outer + 1):
        ev = PhiEvaluator(point.x, point.y, point.z, sigma, problem)
        mult_scale = max(
            1.0,
            float(np.sqrt(_nsq(point.x) + _nsq(point.y) + _nsq(point.z))),
        )
        found_kkt = {}

        def inner_stop(state, j, _ev=ev, _k=k, _sig=sigma, _ms=mult_scale,
                       _found=found_kkt):
            xp, yp, zp = _ev.candidate_multipliers(state)
            w, s = _ev.recover_ws(state)
            cand = PrimalDualPoint(x=xp, y=yp, z=zp, u=state.u, vE=state.vE,
                                   vI=state.vI, w=w, s=s)
            ck = compute_kkt_residuals(cand, problem)
            if ck.eta < params.tol:
                _found["kkt"] = ck
                return True
            dmult = float(
                np.sqrt(
                    _nsq(xp - point.x) + _nsq(yp - point.y) + _nsq(zp - point.z)
                )
            )
            ng = state.grad_norm
            okA = check_inner_stop(ng, dmult, _sig, _k, "A", params, _ms)
            okB = check_inner_stop(ng, dmult, _sig, _k, "Bprime", params)
            return okA and okB

        state, w, s, inner = ssn_minimize(
            point.x, point.y, point.z, sigma, problem,
            params=ssn_params, stop=inner_stop,
            start=(point.u, point.vE, point.vI),
        )
        xp, yp, zp = ev.candidate_multipliers(state)
        point = PrimalDualPoint(x=xp, y=yp, z=zp, u=state.u, vE=state.vE,
                                vI=state.vI, w=w, s=s)
        report.iterations = k
        report.newton_iterations += inner.iterations
        kkt = found_kkt.get("kkt") or compute_kkt_residuals(point, problem)
        report.absorb(kkt)
        if callback is not None:
            callback(k, kkt, sigma, inner.iterations)
        if kkt.eta < params.tol:
            report.termination = "converged"
            report.converged = True
            break
        if inner.status == "linesearch_failure":
            report.termination = "inner_failure"
            break
        if time.perf_counter() - t0 > params.time_cap:
            report.termination = "time_cap"
            break
        if kkt.RP < 1e-4 and np.linalg.norm(point.y) < 1e-10 * (
            1.0 + np.linalg.norm(problem.b)
        ):
            # the method degenerates when the optimal residual is zero
            warnings.warn("loss residual y is (near) zero; Jacobian degenerates",
                          RuntimeWarning)
        if inner.iterations <= params.easy_inner_steps:
            sigma = min(params.rho * sigma, params.sigma_cap)
    else:
        report.termination = "max_outer"

    report.nnz = count_nnz(point.x)
    report.wall_time = time.perf_counter() - t0
    return point, report


def _nsq(v):
    return float(v @ v)
