"""Assembly and solution of the regularized semismooth Newton system.

The generalized Hessian has the form ``H = sigma * (blockdiag(V1, 0, V3)
+ N V2 N^T)`` and the middle term collapses, through the active sets of the
group prox, to a low-rank product ``D D^T`` with ``r + r2`` columns.  The
scalar part of ``V1`` and the 0/1 diagonal ``V3`` live in a diagonal
vector; the rank-one part of ``V1`` is one extra column.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import PcgOptions, CallableOperator, cholesky_solve, pcg_solve, submatrix_columns

#: switch points of the automatic direct/iterative strategy
WOODBURY_MAX_RANK = 500
DIRECT_MAX_DIM = 5000
DENSE_MAX_DIM = 4000
PCG_ITER_CAP = 500


@dataclass
class ActiveSets:
    """Per-group index sets with theta == 1 and the outside-ball group list."""

    xi: list  # index arrays, one per group
    outside: np.ndarray  # group indices with ||v_j|| > sigma*lam1*w_j
    r: int
    r2: int


def build_active_sets(jac_p):
    """Active sets from a structured prox_p Jacobian element."""
    groups = jac_p.groups
    theta_on = jac_p.theta > 0
    xi = [g[theta_on[g]] for g in groups.indices]
    outside = np.flatnonzero(jac_p.outside)
    r = int(sum(xi[j].size for j in outside))
    return ActiveSets(xi=xi, outside=outside, r=r, r2=int(outside.size))


@dataclass(eq=False)
class NewtonSystem:
    """Structured representation of ``H + eps I``; all applies are O(m_hat * width)."""

    diag: np.ndarray  # sigma-scaled blockdiag scalar part, length m_hat
    D: np.ndarray  # (m_hat, r + r2) low-rank factor, unscaled by sigma
    sigma: float
    eps: float
    v1_col: np.ndarray = None  # rank-one column of sigma*V1, already scaled

    @property
    def dim(self):
        return self.diag.shape[0]

    def lowrank(self):
        """All low-rank columns of H, sigma folded in."""
        cols = [np.sqrt(self.sigma) * self.D]
        if self.v1_col is not None:
            cols.append(self.v1_col[:, None])
        return np.hstack(cols)

    def apply_H(self, d):
        out = self.diag * d
        if self.D.shape[1]:
            out = out + self.sigma * (self.D @ (self.D.T @ d))
        if self.v1_col is not None:
            out = out + self.v1_col * (self.v1_col @ d)
        return out

    def apply(self, d):
        return self.apply_H(d) + self.eps * d

    def diag_of_H(self):
        out = self.diag + self.sigma * np.einsum("ij,ij->i", self.D, self.D)
        if self.v1_col is not None:
            out = out + self.v1_col**2
        return out

    def as_dense(self, with_eps=False):
        G = self.lowrank()
        out = np.diag(self.diag) + G @ G.T
        if with_eps:
            out = out + self.eps * np.eye(self.dim)
        return out


def assemble_system(jac_h, jac_p, jac_r, N, active, sigma, eps):
    """Build the structured Newton system from the three prox Jacobians.

    ``N`` is the stacked constraint matrix [A; B_E; B_I]; ``active`` the
    active sets matching ``jac_p``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    m_hat = N.shape[0]
    m = jac_h.dim
    mI = jac_r.shape[0]
    mE = m_hat - m - mI

    diag = np.zeros(m_hat)
    v1_col = None
    if not jac_h.inside:
        diag[:m] = sigma * (1.0 - jac_h.scale)
        v1_col = np.zeros(m_hat)
        v1_col[:m] = np.sqrt(sigma * jac_h.scale) * jac_h.unit
    diag[m + mE :] = sigma * jac_r

    cols = []
    scales = []
    rank1 = []
    for j in active.outside:
        xi_j = active.xi[j]
        coef = jac_p.coef[j]
        if coef > 1.0:
            raise ValueError("group wrongly tagged outside its ball")
        Nj = submatrix_columns(N, xi_j)
        if sp.issparse(Nj):
            Nj = Nj.toarray()
        cols.append(Nj)
        scales.append(np.full(xi_j.size, np.sqrt(1.0 - coef)))
        sj = jac_p.v[xi_j]
        nrm = jac_p.norms[j]
        rank1.append(np.sqrt(coef) / nrm * (Nj @ sj))
    if cols:
        B = np.hstack(cols) * np.concatenate(scales)
        C = np.column_stack(rank1)
        D = np.hstack([B, C])
    else:
        D = np.zeros((m_hat, 0))
    return NewtonSystem(diag=diag, D=D, sigma=sigma, eps=eps, v1_col=v1_col)


def _solve_woodbury(system, rhs):
    lam = system.diag + system.eps
    if np.min(lam) <= 0:
        raise np.linalg.LinAlgError("singular diagonal part")
    G = system.lowrank()
    x = rhs / lam
    if G.shape[1]:
        Gl = G / lam[:, None]
        core = np.eye(G.shape[1]) + G.T @ Gl
        x = x - Gl @ cholesky_solve(core, G.T @ x)
    return x


def _solve_dense(system, rhs):
    return cholesky_solve(system.as_dense(with_eps=True), rhs)


def _solve_pcg(system, rhs, tol, x0=None):
    op = CallableOperator((system.dim, system.dim), system.apply)
    precond = np.maximum(system.diag_of_H() + system.eps, 1e-300)
    opts = PcgOptions(
        max_iter=min(system.dim, PCG_ITER_CAP), tol=tol, preconditioner=precond
    )
    # the convergence test monitors the residual of H alone (no ridge)
    return pcg_solve(op, rhs, opts, x0=x0, residual_map=lambda x, r: r + system.eps * x)


def solve_newton(system, rhs, strategy="auto", pcg_tol=1e-8):
    """Solve ``(H + eps I) delta = rhs``.

    Returns ``(delta, residual, info)`` where ``residual = ||H delta - rhs||``
    (the ridge term is excluded, matching the inexactness test of the
    Newton iteration).
    """
    k = system.D.shape[1] + (0 if system.v1_col is None else 1)
    lam = system.diag + system.eps
    if strategy == "auto":
        well_scaled = lam.min() > 1e-9 * max(lam.max(), 1.0)
        if k <= WOODBURY_MAX_RANK and system.dim <= DIRECT_MAX_DIM and well_scaled:
            strategy = "woodbury"
        elif system.dim <= DENSE_MAX_DIM:
            strategy = "direct"
        else:
            strategy = "pcg"

    info = {"method": strategy, "iters": 0}
    if strategy in ("woodbury", "direct"):
        try:
            if strategy == "woodbury":
                delta = _solve_woodbury(system, rhs)
            else:
                delta = _solve_dense(system, rhs)
        except np.linalg.LinAlgError:
            info["method"] = "pcg-fallback"
            delta, res, iters = _solve_pcg(system, rhs, pcg_tol)
            info["iters"] = iters
            return delta, res, info
        res = float(np.linalg.norm(system.apply_H(delta) - rhs))
        return delta, res, info
    if strategy == "pcg":
        delta, res, iters = _solve_pcg(system, rhs, pcg_tol)
        info["iters"] = iters
        return delta, float(res), info
    raise ValueError(f"unknown strategy {strategy!r}")
