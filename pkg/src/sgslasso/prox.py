"""Closed-form proximal mappings and their structured generalized Jacobians.

Covers the Euclidean-norm loss ``h = ||.||``, the sparse group penalty
``p(x) = lam1 * sum_j w_j ||x_{G_j}|| + lam2 ||x||_1``, the nonnegative
orthant projection, and the conjugate proxes obtained through the Moreau
identity.
"""

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels


@dataclass
class GroupPartition:
    """Disjoint index groups covering {0..n-1} with positive weights.

    ``weights`` defaults to the square root of the group sizes.
    """

    indices: list
    weights: np.ndarray = None
    n: int = field(init=False)

    def __post_init__(self):
        self.indices = [np.asarray(g, dtype=np.int64) for g in self.indices]
        sizes = np.array([g.size for g in self.indices], dtype=np.int64)
        if np.any(sizes == 0):
            raise ValueError("empty group")
        flat = np.concatenate(self.indices) if self.indices else np.empty(0, np.int64)
        self.n = int(flat.size)
        present = np.sort(flat)
        if not np.array_equal(present, np.arange(self.n)):
            raise ValueError("groups must be disjoint and cover {0..n-1}")
        if self.weights is None:
            self.weights = np.sqrt(sizes.astype(float))
        else:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.indices),):
                raise ValueError("one weight per group required")
            if np.any(self.weights <= 0):
                raise ValueError("weights must be positive")
        # flattened layout consumed by the group kernels
        self.ptr = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        self.idx = flat

    @property
    def num_groups(self):
        return len(self.indices)

    @classmethod
    def contiguous(cls, n, num_groups, weights=None):
        """Equal contiguous groups; the remainder goes to the last group."""
        if not (1 <= num_groups <= n):
            raise ValueError("need 1 <= num_groups <= n")
        size = n // num_groups
        bounds = [k * size for k in range(num_groups)] + [n]
        idx = [np.arange(bounds[k], bounds[k + 1]) for k in range(num_groups)]
        return cls(idx, weights)


@dataclass
class PenaltyParams:
    """Regularization strengths; per-group thresholds are lam1 * weight_j."""

    lam1: float
    lam2: float

    def __post_init__(self):
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("regularization parameters must be nonnegative")

    def group_thresholds(self, groups):
        return self.lam1 * groups.weights


def penalty_value(x, groups, params):
    """p(x) = lam1 * sum_j w_j ||x_{G_j}|| + lam2 ||x||_1."""
    gn = kernels.group_norms(np.ascontiguousarray(x, float), groups.ptr, groups.idx)
    return params.lam1 * float(groups.weights @ gn) + params.lam2 * float(
        np.abs(x).sum()
    )


# ---------------------------------------------------------------------------
# proximal mappings


def prox_h(u, sigma):
    """Prox of sigma*||.||: shrink u radially, zero inside the sigma-ball."""
    nu = np.linalg.norm(u)
    if nu <= sigma:
        return np.zeros_like(u)
    return (1.0 - sigma / nu) * u


def prox_h_conjugate(u, sigma):
    """Prox of the conjugate (Moreau); equals the unit l2-ball projection."""
    nu = np.linalg.norm(u)
    if nu <= 1.0:
        return np.asarray(u, dtype=float).copy()
    return u / nu


def soft_threshold(u, t):
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


def prox_p(u, sigma, groups, params):
    """Prox of sigma*p: elementwise soft-threshold then group shrinkage.

    Returns ``(result, v)`` where ``v`` is the intermediate soft-threshold
    output needed for Jacobian construction.
    """
    u = np.ascontiguousarray(u, dtype=float)
    v = soft_threshold(u, sigma * params.lam2)
    thr = np.ascontiguousarray(sigma * params.group_thresholds(groups))
    res, _ = kernels.group_soft_threshold(v, groups.ptr, groups.idx, thr)
    return res, v


def prox_p_conjugate(u, sigma, groups, params):
    """Prox of p*/sigma via the Moreau identity."""
    res, _ = prox_p(sigma * np.asarray(u, float), sigma, groups, params)
    return u - res / sigma


def project_orthant(u):
    """Projection onto the nonnegative orthant."""
    return np.maximum(u, 0.0)


# ---------------------------------------------------------------------------
# generalized Jacobians

# Boundary conventions (each kink takes the element that zeroes the block):
# ||u|| == sigma        -> prox_h Jacobian = 0
# |u_i| == sigma*lam2   -> theta_i = 0
# ||v_j|| == sigma*l1j  -> group block = 0
# u_i == 0 (orthant)    -> diagonal entry 0


@dataclass
class ProxHJacobian:
    """Jacobian element of prox_h at u: 0 inside the ball, else
    ``(1 - sigma/||u||) I + (sigma/||u||) unit unit^T``."""

    inside: bool
    scale: float = 0.0  # sigma / ||u||
    unit: np.ndarray = None  # u / ||u||
    dim: int = 0

    def apply(self, d):
        if self.inside:
            return np.zeros_like(d)
        return (1.0 - self.scale) * d + self.scale * (self.unit @ d) * self.unit

    def as_dense(self):
        if self.inside:
            return np.zeros((self.dim, self.dim))
        eye = np.eye(self.dim)
        return (1.0 - self.scale) * eye + self.scale * np.outer(self.unit, self.unit)


def jacobian_prox_h(u, sigma):
    nu = np.linalg.norm(u)
    if nu <= sigma:
        return ProxHJacobian(inside=True, dim=u.shape[0])
    return ProxHJacobian(inside=False, scale=sigma / nu, unit=u / nu, dim=u.shape[0])


@dataclass
class ProxPJacobian:
    """Structured element of the prox_p Jacobian set, O(n) to apply.

    ``theta`` is the 0/1 soft-threshold diagonal; per group the case tag is
    outside (``||v_j|| > sigma*lam1*w_j``, scalar ``coef_j`` stored) or not
    (block contributes zero).
    """

    theta: np.ndarray
    v: np.ndarray
    norms: np.ndarray  # per-group ||v_j||
    coef: np.ndarray  # sigma*lam1*w_j / ||v_j|| for outside groups, else 0
    outside: np.ndarray  # uint8 mask per group
    groups: GroupPartition

    def apply(self, d):
        return kernels.jacobian_group_apply(
            np.ascontiguousarray(d, float),
            self.theta,
            self.v,
            self.norms,
            self.coef,
            self.outside,
            self.groups.ptr,
            self.groups.idx,
        )

    def as_dense(self):
        n = self.groups.n
        return np.column_stack([self.apply(e) for e in np.eye(n)])


def jacobian_prox_p(u, sigma, groups, params):
    u = np.ascontiguousarray(u, dtype=float)
    theta = (np.abs(u) > sigma * params.lam2).astype(float)
    v = soft_threshold(u, sigma * params.lam2)
    norms = kernels.group_norms(v, groups.ptr, groups.idx)
    thr = sigma * params.group_thresholds(groups)
    outside = (norms > thr).astype(np.uint8)
    coef = np.zeros_like(norms)
    np.divide(thr, norms, out=coef, where=outside.astype(bool))
    return ProxPJacobian(theta, v, norms, coef, outside, groups)


def jacobian_orthant(u):
    """0/1 diagonal of the orthant projection (0 at ties)."""
    return (u > 0).astype(float)
