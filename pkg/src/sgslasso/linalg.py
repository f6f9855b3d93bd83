"""Dense/sparse linear algebra helpers: operators, PCG, dense Cholesky.

Vectors are plain 1-d ``numpy`` arrays; sparse matrices use scipy's CSC
layout (cheap column extraction is needed by the active-set reduction).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp


class LinearOperator:
    """Abstract linear map with an adjoint.

    Subclasses define ``shape = (out_dim, in_dim)``, ``apply`` and
    ``apply_adjoint`` satisfying ``<Op v, w> = <v, Op* w>``.
    """

    shape: tuple

    def apply(self, v):
        raise NotImplementedError

    def apply_adjoint(self, v):
        raise NotImplementedError


class MatrixOperator(LinearOperator):
    """Operator backed by a dense or scipy-sparse matrix."""

    def __init__(self, mat):
        self.mat = mat
        self.shape = mat.shape

    def apply(self, v):
        return self.mat @ v

    def apply_adjoint(self, v):
        return self.mat.T @ v


class CallableOperator(LinearOperator):
    def __init__(self, shape, apply_fn, adjoint_fn=None):
        self.shape = shape
        self._apply = apply_fn
        self._adjoint = adjoint_fn

    def apply(self, v):
        return self._apply(v)

    def apply_adjoint(self, v):
        if self._adjoint is None:
            raise NotImplementedError("no adjoint provided")
        return self._adjoint(v)


def as_operator(obj):
    if isinstance(obj, LinearOperator):
        return obj
    return MatrixOperator(obj)


def to_csc(mat):
    """Canonical compressed-sparse-column form with sorted indices."""
    out = sp.csc_matrix(mat)
    out.sort_indices()
    return out


def submatrix_columns(mat, cols):
    """Columns ``cols`` of ``mat`` (dense array or sparse matrix), in order."""
    cols = np.asarray(cols, dtype=np.int64)
    ncols = mat.shape[1]
    if cols.size and (cols.min() < 0 or cols.max() >= ncols):
        raise IndexError(f"column index out of range [0, {ncols})")
    return mat[:, cols]


def cholesky_solve(mat, rhs):
    """Solve ``mat x = rhs`` for dense symmetric positive definite ``mat``.

    Raises ``np.linalg.LinAlgError`` on a non-positive pivot; the caller is
    expected to regularize and retry.
    """
    mat = np.asarray(mat, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if mat.shape[0] != mat.shape[1] or mat.shape[0] != rhs.shape[0]:
        raise ValueError("dimension mismatch in cholesky_solve")
    try:
        c, low = scipy.linalg.cho_factor(mat, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(str(exc)) from exc
    return scipy.linalg.cho_solve((c, low), rhs, check_finite=False)


@dataclass
class PcgOptions:
    max_iter: int = 500
    tol: float = 1e-8
    preconditioner: np.ndarray | None = None  # diagonal of M, entries > 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.preconditioner is not None and np.any(self.preconditioner <= 0):
            raise ValueError("preconditioner entries must be positive")


def pcg_solve(op, rhs, opts=None, x0=None, residual_map=None):
    """Preconditioned conjugate gradient for a symmetric PD operator.

    Stops when ``||op(x) - rhs|| <= max(tol, tol*||rhs||)`` or at the
    iteration cap.  The residual is recomputed from scratch every 50
    iterations to control drift.  ``residual_map(x, r)``, when given, maps
    the CG residual to the externally monitored one (used by the Newton
    solver, whose convergence test drops the ridge term); its norm replaces
    the plain residual norm in the stopping test.

    Returns ``(x, residual_norm, iterations)``.
    """
    op = as_operator(op)
    if opts is None:
        opts = PcgOptions()
    rhs = np.asarray(rhs, dtype=float)
    if op.shape[0] != rhs.shape[0]:
        raise ValueError("dimension mismatch in pcg_solve")
    x = np.zeros_like(rhs) if x0 is None else x0.astype(float).copy()
    r = rhs - op.apply(x)
    prec = opts.preconditioner

    def mnorm(xv, rv):
        return np.linalg.norm(residual_map(xv, rv)) if residual_map else np.linalg.norm(rv)

    target = max(opts.tol, opts.tol * np.linalg.norm(rhs))
    res = mnorm(x, r)
    if res <= target:
        return x, res, 0
    z = r / prec if prec is not None else r
    p = z.copy()
    rz = r @ z
    for it in range(1, opts.max_iter + 1):
        ap = op.apply(p)
        pap = p @ ap
        if not np.isfinite(pap) or pap <= 0:
            # loss of positive definiteness or overflow; return best iterate
            break
        alpha = rz / pap
        x = x + alpha * p
        if it % 50 == 0:
            r = rhs - op.apply(x)
        else:
            r = r - alpha * ap
        res = mnorm(x, r)
        if not np.isfinite(res):
            raise FloatingPointError("non-finite residual in pcg_solve")
        if res <= target:
            return x, res, it
        z = r / prec if prec is not None else r
        rz_new = r @ z
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    return x, res, opts.max_iter


def adjoint_mismatch(op, rng, trials=100):
    """Max normalized adjoint defect over random probes (test utility)."""
    op = as_operator(op)
    worst = 0.0
    for _ in range(trials):
        v = rng.standard_normal(op.shape[1])
        w = rng.standard_normal(op.shape[0])
        lhs = op.apply(v) @ w
        rhs = v @ op.apply_adjoint(w)
        scale = 1.0 + np.linalg.norm(v) * np.linalg.norm(w)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
