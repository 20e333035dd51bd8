# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: curve distances and compensated kernel sums.

Mirrors ``funcldp._pycore`` function for function.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()

DEF KERNEL_AFFINE = 0
DEF KERNEL_EXP = 1


def l2_distances(const double[:, ::1] curves, const double[::1] x, const double[::1] weights):
    cdef Py_ssize_t n = curves.shape[0], g = curves.shape[1], i, j
    cdef double acc, d
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if x.shape[0] != g or weights.shape[0] != g:
        raise ValueError("grid size mismatch")
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(g):
                d = curves[i, j] - x[j]
                acc = acc + weights[j] * (d * d)
            o[i] = sqrt(acc)
    return out


def sup_distances(const double[:, ::1] curves, const double[::1] x):
    cdef Py_ssize_t n = curves.shape[0], g = curves.shape[1], i, j
    cdef double m, d
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if x.shape[0] != g:
        raise ValueError("grid size mismatch")
    with nogil:
        for i in range(n):
            m = 0.0
            for j in range(g):
                d = fabs(curves[i, j] - x[j])
                if d > m:
                    m = d
            o[i] = m
    return out


cdef inline void _neumaier(double v, double* s, double* c) noexcept nogil:
    cdef double t = s[0] + v
    if fabs(s[0]) >= fabs(v):
        c[0] += (s[0] - t) + v
    else:
        c[0] += (v - t) + s[0]
    s[0] = t


def nw_sums(const double[::1] dist, const double[::1] y, double h, int code, double a, double b):
    cdef Py_ssize_t n = dist.shape[0], i
    cdef double u, k
    cdef double ns = 0.0, nc = 0.0, ds = 0.0, dc = 0.0
    cdef Py_ssize_t active = 0
    if y.shape[0] != n:
        raise ValueError("distances and responses differ in length")
    if code != KERNEL_AFFINE and code != KERNEL_EXP:
        raise ValueError("unknown kernel code")
    with nogil:
        for i in range(n):
            u = dist[i] / h
            if u < 0.0 or u > 1.0:
                continue
            if code == KERNEL_AFFINE:
                k = a - b * u
            else:
                k = exp(-u)
            if k <= 0.0:
                continue
            active += 1
            _neumaier(k * y[i], &ns, &nc)
            _neumaier(k, &ds, &dc)
    return ns + nc, ds + dc, active


def weighted_sums(const double[::1] w, const double[::1] y):
    cdef Py_ssize_t n = w.shape[0], i
    cdef double ns = 0.0, nc = 0.0, ds = 0.0, dc = 0.0
    cdef Py_ssize_t active = 0
    if y.shape[0] != n:
        raise ValueError("weights and responses differ in length")
    with nogil:
        for i in range(n):
            if w[i] <= 0.0:
                continue
            active += 1
            _neumaier(w[i] * y[i], &ns, &nc)
            _neumaier(w[i], &ds, &dc)
    return ns + nc, ds + dc, active
