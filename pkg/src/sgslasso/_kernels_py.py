"""Pure-numpy fallback for the group-wise penalty kernels.

Mirrors the signatures of the compiled module ``sgslasso._kernels``; the
group loops are vectorized with ``np.add.reduceat`` over the flattened
(group-pointer, index) layout.
"""

import numpy as np


def _segment_sums(values, ptr):
    # reduceat needs at least one segment; groups are non-empty by invariant
    return np.add.reduceat(values, ptr[:-1])


def group_norms(v, ptr, idx):
    """Per-group Euclidean norms of ``v``."""
    return np.sqrt(_segment_sums(v[idx] ** 2, ptr))


def group_soft_threshold(v, ptr, idx, thr):
    """Group-wise l2 shrinkage: scale each group by max(0, 1 - thr_j/||v_j||).

    Returns ``(result, norms)`` where ``norms[j] = ||v_{G_j}||``.
    """
    norms = group_norms(v, ptr, idx)
    safe = np.maximum(norms, np.finfo(float).tiny)
    scale = np.where(norms > thr, 1.0 - thr / safe, 0.0)
    sizes = np.diff(ptr)
    res = np.zeros_like(v)
    res[idx] = np.repeat(scale, sizes) * v[idx]
    return res, norms


def jacobian_group_apply(d, theta, v, norms, coef, outside, ptr, idx):
    """Apply the structured prox-Jacobian ``(I - P* Sigma P) Theta`` to ``d``.

    For group ``j`` outside its ball (``outside[j]``), with ``t = Theta d``:
    ``out_j = (1 - coef_j) t_j + coef_j <v_j, t_j> v_j / norms_j**2``;
    groups not outside contribute zero.
    """
    t = theta * d
    dots = _segment_sums((v * t)[idx], ptr)
    nv2 = np.maximum(norms, np.finfo(float).tiny) ** 2
    out_mask = outside.astype(bool)
    sizes = np.diff(ptr)
    lin = np.where(out_mask, 1.0 - coef, 0.0)
    rank1 = np.where(out_mask, coef * dots / nv2, 0.0)
    out = np.zeros_like(d)
    out[idx] = np.repeat(lin, sizes) * t[idx] + np.repeat(rank1, sizes) * v[idx]
    return out
