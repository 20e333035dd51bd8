"""Seeded Monte Carlo checks of the pointwise and uniform tail behaviour of
the estimator, and of the scaled log-MGF of

    Z_n = sum_i (Y_i - r(x) - lam) K(||X_i - x|| / h).

Replicate ``i`` at sample size ``n`` draws from a Philox stream keyed by
``(master_seed, n, i)``, and reductions run in replicate order, so tables do
not depend on the number of worker threads.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from . import ratefn, smallball
from ._backend import core
from .covering import CoveringReport
from .errors import ConfigError, UnsupportedError
from .estimator import nw_estimate, signed_deviations
from .func_core import (
    Curve,
    DesignConfig,
    RadialLaw,
    RegressionModel,
    SemiMetricSpec,
    eval_regression,
    generate_radial_dataset,
    get_metric,
    get_model,
    uniform_grid,
)
from .kernels import KernelSpec, get_kernel, kernel_eval

WILSON_Z = 1.959963984540054
CENSORED = "CENSORED"
UNUSABLE = "UNUSABLE"
NOISE_MODES = ("noiseless", "gaussian")

_TOP_LEVEL_KEYS = {
    "design", "model", "kernel", "smallball", "metric", "lambda", "n_grid", "bandwidth_rule",
    "replicates", "master_seed", "noise_mode", "uniform", "mgf",
}


@dataclass(frozen=True)
class ExperimentConfig:
    design: DesignConfig
    model: RegressionModel
    kernel: KernelSpec
    smallball: smallball.SmallBallModel
    lam: float
    n_grid: tuple
    bandwidth_c: float = 1.0
    bandwidth_a: float = 0.5
    replicates: int = 1000
    master_seed: int = 0
    noise_mode: str = "noiseless"
    uniform: dict = field(default_factory=dict, compare=False)
    mgf: dict = field(default_factory=dict, compare=False)
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("lambda: must be positive")
        if not self.n_grid or any(int(n) < 1 for n in self.n_grid):
            raise ConfigError("n_grid: must be a nonempty list of positive integers")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ConfigError("n_grid: must be strictly increasing")
        if self.replicates < 1:
            raise ConfigError("replicates: must be positive")
        if not self.bandwidth_c > 0 or self.bandwidth_a < 0:
            raise ConfigError("bandwidth_rule: need c > 0 and a >= 0")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"noise_mode: must be one of {NOISE_MODES}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed: must fit in 64 unsigned bits")
        if self.smallball.is_power_law and not self.bandwidth_a * self.smallball.gamma < 1:
            raise ConfigError("bandwidth_rule: need a * gamma < 1 so that n phi(h_n) grows")
        if not self.smallball.is_power_law and self.bandwidth_a > 0:
            raise ConfigError("bandwidth_rule: polynomial bandwidths shrink n phi(h_n) under exponential_type")

    def bandwidth(self, n: int) -> float:
        return self.bandwidth_c * float(n) ** (-self.bandwidth_a)

    def n_phi(self, n: int) -> float:
        return n * smallball.phi(self.smallball, min(self.bandwidth(n), 1.0))

    @property
    def metric(self) -> SemiMetricSpec:
        return self.design.metric

    def design_for(self, n: int) -> DesignConfig:
        sigma = self.design.noise_sigma if self.noise_mode == "gaussian" else 0.0
        return self.design.replace(n=int(n), noise_sigma=sigma)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        from dataclasses import replace

        return replace(self, **kw)

    def config_hash(self) -> str:
        blob = json.dumps(self.source or {}, sort_keys=True, separators=(",", ":"))
        extra = f"|{self.master_seed}|{self.replicates}"
        return hashlib.sha256((blob + extra).encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - _TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("lambda", "n_grid"):
            if key not in d:
                raise ConfigError(f"{key}: required field missing")
        try:
            return cls._from_dict(d)
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, AttributeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None

    @classmethod
    def _from_dict(cls, d: dict) -> "ExperimentConfig":
        metric = get_metric(d.get("metric", "l2"))
        design = _design_from_dict(d.get("design", {}), metric)
        if "smallball" in d:
            sb = smallball.from_config(d["smallball"])
        elif design.radial_law.kind == "power":
            sb = smallball.fractal(design.radial_law.gamma)
        else:
            raise ConfigError("smallball: required when the radial law is table-defined")
        bw = d.get("bandwidth_rule", {})
        return cls(
            design=design,
            model=get_model(d.get("model", {"kind": "constant"})),
            kernel=get_kernel(d.get("kernel", "linear_decay")),
            smallball=sb,
            lam=float(d["lambda"]),
            n_grid=tuple(int(n) for n in d["n_grid"]),
            bandwidth_c=float(bw.get("c", 1.0)),
            bandwidth_a=float(bw.get("a", 0.5)),
            replicates=int(d.get("replicates", 1000)),
            master_seed=int(d.get("master_seed", 0)),
            noise_mode=d.get("noise_mode", "noiseless"),
            uniform=dict(d.get("uniform", {})),
            mgf=dict(d.get("mgf", {})),
            source=d,
        )


def _design_from_dict(d: dict, metric: SemiMetricSpec) -> DesignConfig:
    if not isinstance(d, dict):
        raise ConfigError("design: must be an object")
    allowed = {"center", "grid_size", "radial_law", "direction_law", "direction", "n_basis", "noise_sigma"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"design: unknown fields {sorted(unknown)}")
    grid = uniform_grid(int(d.get("grid_size", 101)))
    c = d.get("center", {"kind": "constant", "value": 0.0})
    if "values" in c:
        center = Curve(grid, c["values"])
    elif c.get("kind", "constant") == "constant":
        center = Curve.constant(float(c.get("value", 0.0)), grid)
    elif c.get("kind") == "sine":
        center = Curve(grid, float(c.get("amplitude", 1.0)) * np.sin(2 * np.pi * grid))
    else:
        raise ConfigError(f"design.center: unknown kind {c.get('kind')!r}")
    law = d.get("radial_law", {"kind": "power", "gamma": 1.0})
    radial = RadialLaw(law.get("kind", "power"), float(law.get("gamma", 1.0)),
                       tuple(law["knots"]) if "knots" in law else None,
                       tuple(law["cdf"]) if "cdf" in law else None)
    direction = Curve(grid, d["direction"]) if "direction" in d else None
    return DesignConfig(center=center, radial_law=radial,
                        direction_law=d.get("direction_law", "symmetric_random"),
                        direction=direction, n_basis=int(d.get("n_basis", 8)),
                        noise_sigma=float(d.get("noise_sigma", 0.0)), n=1, metric=metric)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return ExperimentConfig.from_dict(raw)


def wilson_interval(k: int, n: int, z: float = WILSON_Z):
    if n == 0:
        return float("nan"), float("nan")
    p = k / n
    denom = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


@dataclass
class RateRow:
    n: int
    h_n: float
    n_phi: float
    used: int
    events: tuple   # (plus, minus, abs) counts among usable replicates
    replicates: int

    @property
    def usable(self) -> bool:
        return self.used > 0

    @property
    def p(self):
        if not self.usable:
            return (float("nan"),) * 3
        return tuple(e / self.used for e in self.events)

    @property
    def L(self):
        return tuple(math.log(p) / self.n_phi if p > 0 else None for p in self.p) if self.usable else (None,) * 3

    @property
    def wilson(self):
        return tuple(wilson_interval(e, self.used) for e in self.events)

    @property
    def censored_fraction(self) -> float:
        return 1.0 - self.used / self.replicates

    def se(self, tail: int) -> float:
        p = self.p[tail]
        return math.sqrt(p * (1 - p) / self.used) if self.usable else float("nan")


COLUMNS = [
    "n", "h_n", "n_phi", "p_plus", "p_minus", "p_abs", "L_plus", "L_minus", "L_abs",
    "wilson_plus_lo", "wilson_plus_hi", "wilson_minus_lo", "wilson_minus_hi",
    "wilson_abs_lo", "wilson_abs_hi", "censored_fraction",
    "replicates_used", "events_plus", "events_minus", "events_abs",
    "gamma_plus", "gamma_minus", "gamma_abs",
]


def _fmt(v):
    if v is None:
        return CENSORED
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class RateTable:
    rows: List[RateRow]
    kind: str = "pointwise"
    gammas: tuple = (float("nan"),) * 3
    per_center_p_abs: Optional[np.ndarray] = None     # uniform tables only, shape (rows, centers)
    per_center_used: Optional[np.ndarray] = None

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            if not r.usable:
                w.writerow([_fmt(r.n), _fmt(r.h_n), _fmt(r.n_phi)] + [UNUSABLE] * 12
                           + [_fmt(r.censored_fraction), "0", "0", "0", "0"] + [_fmt(g) for g in self.gammas])
                continue
            wil = [v for lohi in r.wilson for v in lohi]
            w.writerow(
                [_fmt(r.n), _fmt(r.h_n), _fmt(r.n_phi)]
                + [_fmt(p) for p in r.p]
                + [_fmt(v) for v in r.L]
                + [_fmt(v) for v in wil]
                + [_fmt(r.censored_fraction), _fmt(r.used)]
                + [_fmt(e) for e in r.events]
                + [_fmt(g) for g in self.gammas]
            )
        return buf.getvalue() if fh is None else ""


def _map_ordered(fn, count: int, threads: int):
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(count)))


def _gamma_columns(cfg: ExperimentConfig):
    ell = cfg.smallball.ell("center")
    try:
        return tuple(ratefn.gamma(side, cfg.lam, ell, cfg.kernel, cfg.smallball).value
                     for side in ratefn.SIDES)
    except Exception:  # diagnostic columns only; a rate failure must not hide the MC table
        return (float("nan"),) * 3


def pointwise_deviations(cfg: ExperimentConfig, n: int, threads: int = 1) -> np.ndarray:
    """``r_hat(x) - r(x)`` for every replicate at size ``n`` (NaN if degenerate)."""
    design = cfg.design_for(n)
    h = cfg.bandwidth(n)
    rx = eval_regression(cfg.model, design.center)

    def one(i):
        data = generate_radial_dataset(design, (cfg.master_seed, n, i), cfg.model)
        est = nw_estimate(data, design.center, h, cfg.kernel, design.metric)
        return np.nan if est.degenerate else est.value - rx

    return np.array(_map_ordered(one, cfg.replicates, threads), dtype=np.float64)


def _row(cfg, n, devs_plus, devs_minus, devs_abs, used):
    lam = cfg.lam
    events = (int(np.sum(devs_plus > lam)), int(np.sum(devs_minus < -lam)), int(np.sum(devs_abs > lam)))
    return RateRow(n, cfg.bandwidth(n), cfg.n_phi(n), int(used), events, cfg.replicates)


def simulate_pointwise(cfg: ExperimentConfig, threads: int = 1) -> RateTable:
    rows = []
    for n in cfg.n_grid:
        dev = pointwise_deviations(cfg, n, threads)
        ok = dev[~np.isnan(dev)]
        rows.append(_row(cfg, n, ok, ok, np.abs(ok), ok.size))
    return RateTable(rows, "pointwise", _gamma_columns(cfg))


def uniform_deviations(cfg: ExperimentConfig, centers: List[Curve], n: int, threads: int = 1) -> np.ndarray:
    """Signed deviations, shape ``(replicates, centers)``, NaN where degenerate."""
    design = cfg.design_for(n)
    h = cfg.bandwidth(n)

    def one(i):
        data = generate_radial_dataset(design, (cfg.master_seed, n, i), cfg.model)
        return signed_deviations(data, centers, h, cfg.kernel, design.metric, cfg.model)

    return np.array(_map_ordered(one, cfg.replicates, threads), dtype=np.float64).reshape(cfg.replicates, len(centers))


def simulate_uniform(cfg: ExperimentConfig, centers: CoveringReport, threads: int = 1) -> RateTable:
    """Same protocol as :func:`simulate_pointwise` with the sup over centers.

    A replicate is censored only when every center is degenerate; otherwise
    the sup runs over the non-degenerate centers.
    """
    zs = centers.centers
    if not zs:
        raise ValueError("covering has no centers")
    rows, pc_p, pc_used = [], [], []
    for z in zs:
        if not z.same_grid(cfg.design.center):
            raise ValueError("covering centers are not on the design grid")
    for n in cfg.n_grid:
        dev = uniform_deviations(cfg, zs, n, threads)
        valid = ~np.isnan(dev)
        keep = valid.any(axis=1)
        d = np.where(valid, dev, 0.0)[keep]
        v = valid[keep]
        sup_plus = np.where(v, d, -np.inf).max(axis=1)
        inf_minus = np.where(v, d, np.inf).min(axis=1)
        sup_abs = np.where(v, np.abs(d), -np.inf).max(axis=1)
        rows.append(_row(cfg, n, sup_plus, inf_minus, sup_abs, keep.sum()))
        used_k = valid.sum(axis=0)
        exceed_k = (np.where(valid, np.abs(np.nan_to_num(dev)), 0.0) > cfg.lam).sum(axis=0)
        pc_used.append(used_k)
        pc_p.append(np.where(used_k > 0, exceed_k / np.maximum(used_k, 1), np.nan))
    ells = [cfg.smallball.ell("center")] * len(zs)
    try:
        gammas = tuple(ratefn.g_uniform(cfg.lam, ells, side, cfg.kernel, cfg.smallball) for side in ratefn.SIDES)
    except Exception:  # diagnostic columns only
        gammas = (float("nan"),) * 3
    return RateTable(rows, "uniform", gammas, np.array(pc_p), np.array(pc_used))


@dataclass
class MgfReport:
    t: float
    n: int
    h: float
    replicates: int
    empirical_scaled_logmgf: float
    exact_finite_n: float
    asymptotic: float
    mc_standard_error: float
    pooled_scaled_logmgf: float
    pooled_standard_error: float

    @property
    def within_3se(self) -> bool:
        return abs(self.empirical_scaled_logmgf - self.exact_finite_n) <= 3 * self.mc_standard_error

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["within_3se"] = self.within_3se
        d["pooled_within_3se"] = abs(self.pooled_scaled_logmgf - self.exact_finite_n) <= 3 * self.pooled_standard_error
        return d


def _mgf_setting(cfg: ExperimentConfig, n=None, h=None):
    n = int(n if n is not None else cfg.mgf.get("n", cfg.n_grid[0]))
    h = float(h if h is not None else cfg.mgf.get("h", cfg.bandwidth(n)))
    return n, h


def _require_exact_regime(cfg: ExperimentConfig, h: float):
    if cfg.noise_mode != "noiseless":
        raise UnsupportedError("the exact MGF needs noise_mode = noiseless")
    if not cfg.model.increment_free:
        raise UnsupportedError("the exact MGF needs r(X) - r(x) = 0 (constant regression operator)")
    if cfg.design.radial_law.kind != "power":
        raise UnsupportedError("the exact MGF needs the power radial law F(w) = w**gamma")
    if not 0 < h <= 1:
        raise UnsupportedError("the exact MGF formula assumes 0 < h <= 1")


def exact_finite_n_logmgf(cfg: ExperimentConfig, t: float, h: float = None, n: int = None) -> float:
    """``(1 / phi(h)) log(1 + phi(h) J)`` with
    ``J = int_0^1 (exp(-t lam K(u)) - 1) gamma u**(gamma-1) du``.

    Exact at finite ``n`` under the noiseless radial design: the MGF of
    ``Z_n`` is ``(1 + phi(h) J)**n`` and the ``n`` cancels against the
    ``1 / (n phi(h))`` scaling.
    """
    n, h = _mgf_setting(cfg, n, h)
    _require_exact_regime(cfg, h)
    g = cfg.design.radial_law.gamma
    phi_h = h ** g
    J = ratefn.rate_I_ibp(t * cfg.lam, cfg.kernel, smallball.fractal(g))
    return math.log1p(phi_h * J) / phi_h


def mgf_check(cfg: ExperimentConfig, t: float, n: int = None, h: float = None, threads: int = 1) -> MgfReport:
    """Monte Carlo scaled log-MGF of ``Z_n`` against its exact value.

    ``empirical_scaled_logmgf`` averages ``exp(t Z_n)`` over replicates
    (log-sum-exp).  ``pooled_scaled_logmgf`` instead averages the per-point
    factors ``exp(t (Y_i - r(x) - lam) K_i)`` over all ``n * M`` draws and
    raises the mean to the ``n``-th power; it targets the same quantity with
    far smaller variance when ``t Z_n`` is widely spread.
    """
    n, h = _mgf_setting(cfg, n, h)
    _require_exact_regime(cfg, h)
    M = cfg.replicates
    if M < 100:
        raise ConfigError("replicates: mgf_check needs at least 100 replicates")
    design = cfg.design_for(n)
    rx = eval_regression(cfg.model, design.center)
    lam = cfg.lam

    def one(i):
        data = generate_radial_dataset(design, (cfg.master_seed, n, i), cfg.model)
        shifted = np.ascontiguousarray(data.responses - rx - lam)
        code = cfg.kernel.core_code
        if code is not None:
            z, _, _ = core.nw_sums(data.distances_to_center, shifted, h, *code)
        else:
            w = np.ascontiguousarray(kernel_eval(cfg.kernel, data.distances_to_center / h))
            z, _, _ = core.weighted_sums(w, shifted)
        K = kernel_eval(cfg.kernel, data.distances_to_center / h)
        factors = np.expm1(t * shifted * K)
        return z, math.fsum(factors), math.fsum(factors * factors)

    out = _map_ordered(one, M, threads)
    tz = t * np.array([o[0] for o in out])
    n_phi = n * h ** design.radial_law.gamma
    log_mean = logsumexp(tz) - math.log(M)
    w = np.exp(tz - tz.max())
    rel_se = float(np.std(w, ddof=1) / (math.sqrt(M) * np.mean(w)))

    total = n * M
    s1 = math.fsum(o[1] for o in out) / total
    s2 = math.fsum(o[2] for o in out) / total
    var = max(s2 - s1 * s1, 0.0) * total / (total - 1)
    phi_h = n_phi / n
    pooled = math.log1p(s1) / phi_h
    pooled_se = math.sqrt(var / total) / (1.0 + s1) / phi_h

    return MgfReport(
        t=float(t), n=n, h=h, replicates=M,
        empirical_scaled_logmgf=float(log_mean / n_phi),
        exact_finite_n=exact_finite_n_logmgf(cfg, t, h, n),
        asymptotic=cfg.smallball.ell("center") * ratefn.rate_I(t, lam, cfg.kernel, cfg.smallball),
        mc_standard_error=rel_se / n_phi,
        pooled_scaled_logmgf=pooled,
        pooled_standard_error=pooled_se,
    )
