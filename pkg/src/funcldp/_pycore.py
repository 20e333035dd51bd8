"""Pure-Python/numpy versions of the compiled kernels in ``_core.pyx``.

Every kernel replays the floating-point operation sequence of the compiled
loops (left-to-right accumulation, same Neumaier update, same libm ``exp``),
so both backends return bit-identical results.  Ties such as a point at
exactly ``xi`` from a covering center then resolve the same way.
"""
import math

import numpy as np

KERNEL_AFFINE = 0
KERNEL_EXP = 1


def l2_distances(curves, x, weights):
    curves = np.asarray(curves, dtype=np.float64)
    if curves.shape[1] != len(x) or len(weights) != len(x):
        raise ValueError("grid size mismatch")
    diff = curves - x
    # cumsum accumulates sequentially, like the compiled loop; a matmul would not
    return np.sqrt(np.cumsum((diff * diff) * weights, axis=1)[:, -1])


def sup_distances(curves, x):
    curves = np.asarray(curves, dtype=np.float64)
    if curves.shape[1] != len(x):
        raise ValueError("grid size mismatch")
    return np.max(np.abs(curves - x), axis=1)


def _neumaier_sums(pairs):
    ns = nc = ds = dc = 0.0
    active = 0
    for k, yk in pairs:
        active += 1
        v = k * yk
        t = ns + v
        if abs(ns) >= abs(v):
            nc += (ns - t) + v
        else:
            nc += (v - t) + ns
        ns = t
        t = ds + k
        if abs(ds) >= abs(k):
            dc += (ds - t) + k
        else:
            dc += (k - t) + ds
        ds = t
    return ns + nc, ds + dc, active


def nw_sums(dist, y, h, code, a, b):
    dist = np.asarray(dist, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) != len(dist):
        raise ValueError("distances and responses differ in length")
    if code not in (KERNEL_AFFINE, KERNEL_EXP):
        raise ValueError("unknown kernel code")
    u = dist / h
    idx = np.flatnonzero((u >= 0.0) & (u <= 1.0))

    def pairs():
        for i in idx:
            ui = float(u[i])
            k = a - b * ui if code == KERNEL_AFFINE else math.exp(-ui)
            if k > 0.0:
                yield k, float(y[i])

    return _neumaier_sums(pairs())


def weighted_sums(w, y):
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) != len(w):
        raise ValueError("weights and responses differ in length")
    idx = np.flatnonzero(w > 0.0)
    return _neumaier_sums((float(w[i]), float(y[i])) for i in idx)
