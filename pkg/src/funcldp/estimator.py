"""Functional Nadaraya-Watson estimator.

``r_hat(x) = sum_i Y_i K(||X_i - x|| / h) / sum_i K(||X_i - x|| / h)``

Sums are accumulated with Neumaier compensation in a fixed order.  An empty
window is reported as degenerate instead of being patched to 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._backend import core
from .func_core import L2, Curve, DataSet, RegressionModel, SemiMetricSpec, eval_regression
from .kernels import KernelSpec, kernel_eval


@dataclass(frozen=True)
class EstimateResult:
    value: Optional[float]
    numerator: float
    denominator: float
    active_count: int

    @property
    def degenerate(self) -> bool:
        return self.value is None


def nw_from_distances(distances, responses, h: float, k: KernelSpec, backend=None) -> EstimateResult:
    """Estimator from precomputed distances to the evaluation point."""
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    be = backend or core
    d = np.ascontiguousarray(distances, dtype=np.float64)
    y = np.ascontiguousarray(responses, dtype=np.float64)
    code = k.core_code
    if code is not None:
        num, den, active = be.nw_sums(d, y, float(h), *code)
    else:
        w = np.ascontiguousarray(kernel_eval(k, d / h), dtype=np.float64)
        num, den, active = be.weighted_sums(w, y)
    value = num / den if den > 0 else None
    return EstimateResult(value, float(num), float(den), int(active))


def nw_estimate(data: DataSet, x: Curve, h: float, k: KernelSpec, m: SemiMetricSpec = L2) -> EstimateResult:
    if len(data) == 0:
        raise ValueError("empty data set")
    if not x.same_grid(data.center):
        raise ValueError("evaluation curve is not on the data grid")
    if x is data.center or np.array_equal(x.values, data.center.values):
        dist = data.distances_to_center
    else:
        dist = m.distances(data.curves, x.values, data.grid)
    return nw_from_distances(dist, data.responses, h, k)


def sup_deviation(data: DataSet, centers: Sequence[Curve], h: float, k: KernelSpec,
                  m: SemiMetricSpec, model: RegressionModel):
    """Max over centers of ``|r_hat(z) - r(z)|`` and the number of degenerate
    centers (excluded from the max).  Raises if every center is degenerate."""
    devs = signed_deviations(data, centers, h, k, m, model)
    ok = ~np.isnan(devs)
    if not ok.any():
        raise ValueError("all centers are degenerate")
    return float(np.max(np.abs(devs[ok]))), int((~ok).sum())


def signed_deviations(data: DataSet, centers: Sequence[Curve], h: float, k: KernelSpec,
                      m: SemiMetricSpec, model: RegressionModel) -> np.ndarray:
    """``r_hat(z) - r(z)`` per center, NaN where the estimate is degenerate."""
    if len(centers) == 0:
        raise ValueError("need at least one center")
    out = np.empty(len(centers))
    for j, z in enumerate(centers):
        est = nw_estimate(data, z, h, k, m)
        out[j] = np.nan if est.degenerate else est.value - eval_regression(model, z)
    return out
