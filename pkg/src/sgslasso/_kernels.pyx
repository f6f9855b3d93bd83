# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled group-wise kernels for the sparse group penalty.

Groups are passed in flattened form: ``idx`` concatenates the index sets of
all groups and ``ptr`` holds the group boundaries (``ptr[j]:ptr[j+1]`` slices
group ``j`` out of ``idx``).
"""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def group_norms(double[::1] v, cnp.int64_t[::1] ptr, cnp.int64_t[::1] idx):
    """Per-group Euclidean norms of ``v``."""
    cdef Py_ssize_t J = ptr.shape[0] - 1
    cdef Py_ssize_t j, k
    cdef double acc, vi
    out = np.empty(J, dtype=np.float64)
    cdef double[::1] out_v = out
    for j in range(J):
        acc = 0.0
        for k in range(ptr[j], ptr[j + 1]):
            vi = v[idx[k]]
            acc += vi * vi
        out_v[j] = sqrt(acc)
    return out


def group_soft_threshold(double[::1] v, cnp.int64_t[::1] ptr,
                         cnp.int64_t[::1] idx, double[::1] thr):
    """Group-wise l2 shrinkage: scale each group by max(0, 1 - thr_j/||v_j||).

    Returns ``(result, norms)`` where ``norms[j] = ||v_{G_j}||``.
    """
    cdef Py_ssize_t J = ptr.shape[0] - 1
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t j, k
    cdef double acc, nv, scale, vi
    res = np.zeros(n, dtype=np.float64)
    norms = np.empty(J, dtype=np.float64)
    cdef double[::1] res_v = res
    cdef double[::1] norms_v = norms
    for j in range(J):
        acc = 0.0
        for k in range(ptr[j], ptr[j + 1]):
            vi = v[idx[k]]
            acc += vi * vi
        nv = sqrt(acc)
        norms_v[j] = nv
        if nv > thr[j]:
            scale = 1.0 - thr[j] / nv
            for k in range(ptr[j], ptr[j + 1]):
                res_v[idx[k]] = scale * v[idx[k]]
    return res, norms


def jacobian_group_apply(double[::1] d, double[::1] theta, double[::1] v,
                         double[::1] norms, double[::1] coef,
                         cnp.uint8_t[::1] outside,
                         cnp.int64_t[::1] ptr, cnp.int64_t[::1] idx):
    """Apply the structured prox-Jacobian ``(I - P* Sigma P) Theta`` to ``d``.

    For group ``j`` outside its ball (``outside[j]``), with ``t = Theta d``:
    ``out_j = (1 - coef_j) t_j + coef_j <v_j, t_j> v_j / norms_j**2``;
    groups not outside contribute zero.
    """
    cdef Py_ssize_t J = ptr.shape[0] - 1
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t j, k, i
    cdef double dot, a, nv2, ti
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] out_v = out
    for j in range(J):
        if not outside[j]:
            continue
        a = coef[j]
        nv2 = norms[j] * norms[j]
        dot = 0.0
        for k in range(ptr[j], ptr[j + 1]):
            i = idx[k]
            dot += v[i] * theta[i] * d[i]
        for k in range(ptr[j], ptr[j + 1]):
            i = idx[k]
            ti = theta[i] * d[i]
            out_v[i] = (1.0 - a) * ti + a * dot * v[i] / nv2
    return out
