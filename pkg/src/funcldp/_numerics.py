"""Composite Gauss-Legendre rules and golden-section search."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@lru_cache(maxsize=64)
def composite_gauss_legendre(panels: int, nodes: int, grading_levels: int, grading_ratio: float):
    """Nodes and weights on [eps, 1].

    [1/panels, 1] is split into ``panels - 1`` equal panels; the first panel
    is subdivided geometrically toward 0 with ratio ``grading_ratio`` so that
    integrands like ``u**(g - 1)`` stay accurate.  Returns ``(u, w, eps)``
    where ``eps`` is the uncovered stub ``[0, eps]`` left to the caller.
    """
    x, wx = np.polynomial.legendre.leggauss(nodes)
    first = 1.0 / panels
    edges = [first * grading_ratio ** j for j in range(grading_levels, 0, -1)]
    edges += list(np.linspace(first, 1.0, panels))
    edges = np.asarray(edges, dtype=np.float64)
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo)[:, None] / 2.0
    mid = (hi + lo)[:, None] / 2.0
    u = (mid + half * x[None, :]).ravel()
    w = (half * wx[None, :]).ravel()
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w, float(edges[0])


def golden_section_min(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 200):
    """Minimize a unimodal ``f`` on [a, b]; returns ``(x, f(x))``."""
    a, b = min(a, b), max(a, b)
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)
