"""Finite xi-nets over families of curves and the covering-number fit
``tau * xi**alpha = C``."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .func_core import L2, Curve, SemiMetricSpec


@dataclass
class CoveringReport:
    centers: List[Curve]
    center_indices: List[int]
    radius: float
    tau: int
    alpha_hat: Optional[float] = None
    C_hat: Optional[float] = None
    fit: dict = field(default_factory=dict)

    def to_dict(self, include_curves: bool = True):
        out = {
            "radius": self.radius,
            "tau": self.tau,
            "center_indices": self.center_indices,
            "alpha_hat": self.alpha_hat,
            "C_hat": self.C_hat,
        }
        if self.fit:
            out["fit"] = self.fit
        if include_curves:
            out["grid"] = self.centers[0].grid.tolist() if self.centers else []
            out["centers"] = [c.values.tolist() for c in self.centers]
        return out


def _stack(points: Sequence[Curve]):
    if len(points) == 0:
        raise ValueError("need at least one point")
    grid = points[0].grid
    for p in points:
        if not p.same_grid(points[0]):
            raise ValueError("all curves must share a grid")
    return grid, np.ascontiguousarray([p.values for p in points], dtype=np.float64)


def pairwise_distances(points: Sequence[Curve], m: SemiMetricSpec = L2) -> np.ndarray:
    grid, arr = _stack(points)
    D = np.empty((len(arr), len(arr)))
    for i in range(len(arr)):
        D[i] = m.distances(arr, arr[i], grid)
    # symmetrize away last-ulp asymmetry of the row reductions
    return np.minimum(D, D.T)


def _greedy_indices(D: np.ndarray, xi: float, strategy: str) -> List[int]:
    n = D.shape[0]
    if strategy == "farthest":
        centers = [0]
        mind = D[0].copy()
        while mind.max() > xi:
            j = int(np.argmax(mind))
            centers.append(j)
            mind = np.minimum(mind, D[j])
        return centers
    if strategy != "max_coverage":
        raise ValueError(f"unknown strategy {strategy!r}")
    ball = D <= xi
    uncovered = np.ones(n, dtype=bool)
    centers = []
    while uncovered.any():
        gains = ball[:, uncovered].sum(axis=1)
        gains[~uncovered] = -1
        j = int(np.argmax(gains))
        centers.append(j)
        uncovered &= ~ball[j]
    return centers


def greedy_net(points: Sequence[Curve], xi: float, m: SemiMetricSpec = L2,
               strategy: str = "farthest", distances: Optional[np.ndarray] = None) -> CoveringReport:
    """Greedy xi-net whose centers are a subset of ``points``.

    ``farthest`` (default): start from the first point and keep promoting
    the point farthest from the current centers until every point is within
    ``xi``.  The visiting order does not depend on ``xi``, so ``tau`` is
    monotone in ``xi``.  ``max_coverage``: promote the uncovered point whose
    ball holds the most uncovered points; usually fewer centers, but not
    monotone in ``xi`` in general.  Ties go to the lowest index.

    Either way the centers are pairwise more than ``xi`` apart.
    """
    if not xi > 0:
        raise ValueError("radius must be positive")
    D = pairwise_distances(points, m) if distances is None else distances
    idx = _greedy_indices(D, xi, strategy)
    return CoveringReport([points[i] for i in idx], idx, float(xi), len(idx))


def is_valid_cover(points: Sequence[Curve], report: CoveringReport, m: SemiMetricSpec = L2) -> bool:
    grid, arr = _stack(points)
    mind = np.full(len(arr), np.inf)
    for c in report.centers:
        mind = np.minimum(mind, m.distances(arr, c.values, grid))
    return bool(np.all(mind <= report.radius))


def estimate_alpha(points: Sequence[Curve], xi_grid: Sequence[float], m: SemiMetricSpec = L2,
                   strategy: str = "farthest", return_taus: bool = False):
    """Fit ``log tau = log C + alpha log(1/xi)`` by least squares.

    ``C_hat`` is the geometric mean of ``tau * xi**alpha_hat``.  A constant
    ``tau`` over the grid gives ``alpha_hat = 0`` with a warning.
    """
    xi = np.asarray(xi_grid, dtype=np.float64)
    if xi.size < 3:
        raise ValueError("need at least 3 radii")
    if np.any(xi <= 0) or np.any(np.diff(xi) >= 0):
        raise ValueError("xi_grid must be positive and strictly decreasing")
    D = pairwise_distances(points, m)
    taus = np.array([len(_greedy_indices(D, r, strategy)) for r in xi])
    if np.all(taus == taus[0]):
        warnings.warn("covering number is constant over the radius grid; alpha_hat set to 0", RuntimeWarning)
        alpha = 0.0
        C = float(taus[0])
    else:
        alpha, _ = np.polyfit(np.log(1.0 / xi), np.log(taus), 1)
        alpha = float(alpha)
        C = float(np.exp(np.mean(np.log(taus * xi ** alpha))))
    if return_taus:
        return alpha, C, taus
    return alpha, C


def covering_report(points: Sequence[Curve], xi: float, xi_grid=None, m: SemiMetricSpec = L2,
                    strategy: str = "farthest") -> CoveringReport:
    """Net at ``xi`` plus, when ``xi_grid`` is given, the (alpha, C) fit and
    the spread of ``tau * xi**alpha_hat`` across the grid."""
    rep = greedy_net(points, xi, m, strategy)
    if xi_grid is not None:
        alpha, C, taus = estimate_alpha(points, xi_grid, m, strategy, return_taus=True)
        prod = taus * np.asarray(xi_grid, dtype=np.float64) ** alpha
        rep.alpha_hat, rep.C_hat = alpha, C
        rep.fit = {
            "xi_grid": [float(v) for v in xi_grid],
            "taus": [int(t) for t in taus],
            "relative_spread": float(prod.max() / prod.min() - 1.0),
        }
    return rep


def constant_curve_family(count: int = 101, grid=None) -> List[Curve]:
    """Constants ``j / (count - 1)``: an isometric copy of [0, 1] under L2."""
    return [Curve.constant(j / (count - 1), grid) for j in range(count)]


def segment_family(center: Curve, direction: np.ndarray, radius: float, count: int,
                   m: SemiMetricSpec = L2) -> List[Curve]:
    """``center + v * U`` for ``v`` in [-radius, radius], unit ``U``; the
    center itself comes first so greedy nets always contain it."""
    U = np.asarray(direction, dtype=np.float64)
    U = U / m.norm(U[None, :], center.grid)[0]
    vs = np.linspace(-radius, radius, count)
    vs = np.concatenate([[0.0], vs[vs != 0.0]])
    return [Curve(center.grid, center.values + v * U) for v in vs]
