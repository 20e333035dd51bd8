"""Rate function ``I(t)`` and the Gamma functionals built from it.

    I(t) = exp(-s K(1)) - 1 + s * int_0^1 K'(u) exp(-s K(u)) zeta0(u) du,
    s = t * lam

I depends on (t, lam) only through ``s``.  ``Gamma+ = inf_{t>0} ell I(t)``,
``Gamma- = inf_{t>0} ell I(-t)`` and ``Gamma = max(Gamma+, Gamma-)``.  The
infimum over ``t`` is taken on a truncated log-spaced range; when the best
value sits on an endpoint the report carries a boundary flag instead of a
fabricated interior minimizer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._numerics import composite_gauss_legendre, golden_section_min
from .errors import NumericError, UnsupportedError
from .kernels import KernelSpec
from .smallball import SmallBallModel

AT_UPPER_BOUND = "AT_UPPER_BOUND"
AT_LOWER_BOUND = "AT_LOWER_BOUND"
SIDES = ("plus", "minus", "abs")


@dataclass(frozen=True)
class RateQuadrature:
    panels: int = 64
    nodes: int = 16
    grading_levels: int = 40
    grading_ratio: float = 0.2
    abs_tol: float = 1e-10
    check: bool = True

    def rule(self, panels: Optional[int] = None):
        return composite_gauss_legendre(panels or self.panels, self.nodes,
                                        self.grading_levels, self.grading_ratio)


DEFAULT_QUADRATURE = RateQuadrature()


def _integral_term(s, k: KernelSpec, m: SmallBallModel, q: RateQuadrature, panels: int):
    u, w, _ = q.rule(panels)
    Ku = k._raw(u)
    g = k._raw_deriv(u) * (u ** m.gamma) * w
    return s * (np.exp(-np.outer(s, Ku)) @ g)


def rate_I(t, lam: float, k: KernelSpec, m: SmallBallModel, q: RateQuadrature = DEFAULT_QUADRATURE):
    """I(t) for scalar or array ``t``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    s = np.atleast_1d(np.asarray(t, dtype=np.float64)) * lam
    head = np.exp(-s * k.K_at_1) - 1.0
    if not m.is_power_law:
        # zeta0 vanishes on [0, 1): the integral term is exactly zero
        out = head
    else:
        out = head + _integral_term(s, k, m, q, q.panels)
        if q.check:
            fine = head + _integral_term(s, k, m, q, 2 * q.panels)
            # relative beyond |I| = 1: I(-t) grows like exp(t lam K(0))
            err = float(np.max(np.abs(fine - out) / np.maximum(1.0, np.abs(out))))
            if err > q.abs_tol:
                raise NumericError("rate_I quadrature did not converge under panel doubling",
                                   {"max_change": err, "panels": q.panels, "abs_tol": q.abs_tol})
        out = np.where(s == 0.0, 0.0, out)
    return float(out[0]) if np.ndim(t) == 0 else out


def rate_I_ibp(s, k: KernelSpec, m: SmallBallModel, q: RateQuadrature = DEFAULT_QUADRATURE):
    """Independent route to I after integrating by parts:
    ``-1 + int_0^1 exp(-s K(u)) gamma u**(gamma-1) du`` (power-law zeta0)."""
    if not m.is_power_law:
        raise UnsupportedError("the integration-by-parts form needs a differentiable power-law zeta0")
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    u, w, eps = q.rule()
    dens = m.gamma * u ** (m.gamma - 1.0) * w
    body = np.exp(-np.outer(s_arr, k._raw(u))) @ dens
    # stub [0, eps]: K ~ K(0) there
    body = body + np.exp(-s_arr * float(k._raw(np.array([0.0]))[0])) * eps ** m.gamma
    out = np.where(s_arr == 0.0, 0.0, body - 1.0)
    return float(out[0]) if np.ndim(s) == 0 else out


@dataclass
class RateReport:
    side: str
    value: float
    argmin_t: float
    flag: Optional[str]
    t_range: tuple
    lam: float
    ell: float
    samples: np.ndarray = field(repr=False)

    def to_dict(self, include_samples: bool = False):
        out = {
            "side": self.side,
            "value": self.value,
            "argmin_t": self.flag if self.flag else self.argmin_t,
            "argmin_t_value": self.argmin_t,
            "flag": self.flag,
            "t_range": list(self.t_range),
            "lambda": self.lam,
            "ell": self.ell,
        }
        if include_samples:
            out["samples"] = self.samples.tolist()
        return out


def default_t_range(lam: float):
    return (1e-3 / lam, 50.0 / lam)


def _one_side(sign: float, side: str, lam, ell_x, k, m, t_range, q, grid_size) -> RateReport:
    t_min, t_max = t_range
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    ts = np.logspace(math.log10(t_min), math.log10(t_max), grid_size)
    ts[0], ts[-1] = t_min, t_max
    vals = ell_x * rate_I(sign * ts, lam, k, m, q)
    i = int(np.argmin(vals))
    samples = np.column_stack([ts, vals])
    if i == 0:
        return RateReport(side, float(vals[0]), float(ts[0]), AT_LOWER_BOUND, (t_min, t_max), lam, ell_x, samples)
    if i == grid_size - 1:
        return RateReport(side, float(vals[-1]), float(ts[-1]), AT_UPPER_BOUND, (t_min, t_max), lam, ell_x, samples)

    def f(logt):
        return ell_x * rate_I(sign * math.exp(logt), lam, k, m, q)

    lt, fv = golden_section_min(f, math.log(ts[i - 1]), math.log(ts[i + 1]))
    if fv < vals[i]:
        return RateReport(side, float(fv), math.exp(lt), None, (t_min, t_max), lam, ell_x, samples)
    return RateReport(side, float(vals[i]), float(ts[i]), None, (t_min, t_max), lam, ell_x, samples)


def gamma(side: str, lam: float, ell_x: float, k: KernelSpec, m: SmallBallModel,
          t_range=None, q: RateQuadrature = DEFAULT_QUADRATURE, grid_size: int = 256) -> RateReport:
    """Gamma+ (``plus``), Gamma- (``minus``) or their max (``abs``)."""
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    if not lam > 0 or not ell_x > 0:
        raise ValueError("lambda and ell must be positive")
    t_range = tuple(t_range) if t_range is not None else default_t_range(lam)
    if side != "abs":
        return _one_side(1.0 if side == "plus" else -1.0, side, lam, ell_x, k, m, t_range, q, grid_size)
    plus = _one_side(1.0, "plus", lam, ell_x, k, m, t_range, q, grid_size)
    minus = _one_side(-1.0, "minus", lam, ell_x, k, m, t_range, q, grid_size)
    best = plus if plus.value >= minus.value else minus
    return RateReport("abs", best.value, best.argmin_t, best.flag, best.t_range, lam, ell_x, best.samples)


def g_uniform(lam: float, ell_values: Sequence[float], side: str, k: KernelSpec, m: SmallBallModel,
              t_range=None, q: RateQuadrature = DEFAULT_QUADRATURE) -> float:
    """``sup_x Gamma_x(lam)`` over covering centers.

    Gamma is linear in ``ell(x) > 0``, so one infimum with ``ell = 1`` is
    scaled by each center's ``ell``.
    """
    ells = np.asarray(ell_values, dtype=np.float64)
    if ells.size == 0:
        raise ValueError("need at least one ell value")
    if np.any(ells <= 0):
        raise ValueError("ell values must be positive")
    base = gamma(side, lam, 1.0, k, m, t_range, q).value
    return float(np.max(ells * base))

