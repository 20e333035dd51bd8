"""Curves on a shared grid, semi-metrics, regression operators and the
synthetic radial design.

The radial design draws ``X_i = x + R_i U_i`` with ``||U_i|| = 1`` and
``R_i ~ F``, so the distance ``W_i = ||X_i - x||`` has CDF exactly ``F`` and
the small-ball decomposition holds with ``ell(x) = 1`` and ``phi = F``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._backend import core
from .errors import ConfigError, UnsupportedError

DEFAULT_GRID_SIZE = 101
METRIC_KINDS = ("l2", "sup", "l2_derivative")
MODEL_KINDS = ("constant", "integral_linear", "integral_quadratic")
DIRECTION_LAWS = ("fixed_direction", "symmetric_random")


def uniform_grid(size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    if size < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(0.0, 1.0, size)


def trapezoid_weights(grid) -> np.ndarray:
    """Weights ``w`` with ``sum(w * f) ~ int_0^1 f``; they sum to 1."""
    g = np.asarray(grid, dtype=np.float64)
    dx = np.diff(g)
    w = np.zeros_like(g)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def _check_grid(grid):
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("grid must be a 1-D sequence of length >= 2")
    if g[0] != 0.0 or g[-1] != 1.0:
        raise ValueError("grid must start at 0 and end at 1")
    if np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing")
    return g


@dataclass(frozen=True, eq=False)
class Curve:
    """A real function sampled on a grid of [0, 1]."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = _check_grid(self.grid)
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != g.shape:
            raise ValueError("values and grid differ in length")
        if not np.all(np.isfinite(v)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, c: float, grid=None) -> "Curve":
        g = uniform_grid() if grid is None else grid
        return cls(g, np.full(len(g), float(c)))

    @classmethod
    def from_function(cls, f, grid=None) -> "Curve":
        g = uniform_grid() if grid is None else np.asarray(grid, dtype=np.float64)
        return cls(g, np.asarray(f(g), dtype=np.float64) * np.ones_like(g))

    def same_grid(self, other: "Curve") -> bool:
        return self.grid is other.grid or np.array_equal(self.grid, other.grid)

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return self.same_grid(other) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.grid.tobytes(), self.values.tobytes()))


@dataclass(frozen=True)
class SemiMetricSpec:
    """``l2``: trapezoid L2 norm of the difference; ``sup``: max abs
    difference on the grid; ``l2_derivative``: L2 norm of the piecewise
    slope of the difference (a genuine semi-metric: constants are at
    distance 0)."""

    kind: str = "l2"

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ConfigError(f"unknown metric {self.kind!r}; expected one of {', '.join(METRIC_KINDS)}")

    def distances(self, curves: np.ndarray, x: np.ndarray, grid: np.ndarray) -> np.ndarray:
        """Distances from every row of ``curves`` to ``x`` (all on ``grid``)."""
        curves = np.ascontiguousarray(curves, dtype=np.float64)
        x = np.ascontiguousarray(x, dtype=np.float64)
        if curves.ndim == 1:
            curves = curves[None, :]
        if self.kind == "sup":
            return core.sup_distances(curves, x)
        if self.kind == "l2_derivative":
            # cell slopes, weighted by cell width; exactly 0 for constant shifts
            dx = np.diff(grid)
            slopes = np.ascontiguousarray(np.diff(curves - x, axis=1) / dx)
            return core.l2_distances(slopes, np.zeros(dx.size), dx)
        return core.l2_distances(curves, x, trapezoid_weights(grid))

    def norm(self, curves: np.ndarray, grid: np.ndarray) -> np.ndarray:
        return self.distances(curves, np.zeros(len(grid)), grid)


L2 = SemiMetricSpec("l2")


def get_metric(spec) -> SemiMetricSpec:
    if isinstance(spec, SemiMetricSpec):
        return spec
    if isinstance(spec, dict):
        spec = spec.get("kind")
    return SemiMetricSpec(spec)


def semi_metric_distance(a: Curve, b: Curve, m: SemiMetricSpec = L2) -> float:
    if not a.same_grid(b):
        raise ValueError("curves are sampled on different grids")
    return float(m.distances(a.values[None, :], b.values, a.grid)[0])


@dataclass(frozen=True)
class RegressionModel:
    """Regression operator ``r``.

    constant:            r(z) = c
    integral_linear:     r(z) = a * int z + b
    integral_quadratic:  r(z) = a * int z**2, Lipschitz on ``{||z|| <= radius}``
    """

    kind: str = "constant"
    parameters: dict = field(default_factory=dict)
    lipschitz_exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown regression model {self.kind!r}")
        if not 0 < self.lipschitz_exponent <= 1:
            raise ConfigError("lipschitz_exponent must lie in (0, 1]")
        defaults = {
            "constant": {"c": 0.0},
            "integral_linear": {"a": 1.0, "b": 0.0},
            "integral_quadratic": {"a": 1.0, "radius": 2.0},
        }[self.kind]
        unknown = set(self.parameters) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        object.__setattr__(self, "parameters", {**defaults, **{k: float(v) for k, v in self.parameters.items()}})

    def __getitem__(self, key):
        return self.parameters[key]

    def lipschitz_constant(self, metric: SemiMetricSpec = L2) -> float:
        """A constant C with ``|r(a) - r(b)| <= C d(a, b)`` (exponent 1)."""
        if self.kind == "constant":
            return 1.0
        if metric.kind == "l2_derivative":
            raise UnsupportedError("integral operators are not Lipschitz for the derivative semi-metric")
        if self.kind == "integral_linear":
            return max(abs(self["a"]), 1e-300)
        return max(2.0 * abs(self["a"]) * self["radius"], 1e-300)

    @property
    def increment_free(self) -> bool:
        """True when r(X) - r(x) vanishes for every X (the exact MGF regime)."""
        return self.kind == "constant" or self["a"] == 0.0


def get_model(spec) -> RegressionModel:
    if isinstance(spec, RegressionModel):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("model must be an object with 'kind'")
    return RegressionModel(spec["kind"], dict(spec.get("parameters", {})),
                           float(spec.get("lipschitz_exponent", 1.0)))


def eval_regression_many(model: RegressionModel, curves: np.ndarray, grid) -> np.ndarray:
    curves = np.atleast_2d(np.asarray(curves, dtype=np.float64))
    if model.kind == "constant":
        return np.full(curves.shape[0], model["c"])
    w = trapezoid_weights(grid)
    if model.kind == "integral_linear":
        return model["a"] * (curves @ w) + model["b"]
    return model["a"] * ((curves * curves) @ w)


def eval_regression(model: RegressionModel, z: Curve) -> float:
    return float(eval_regression_many(model, z.values[None, :], z.grid)[0])


@dataclass(frozen=True)
class RadialLaw:
    """Law of ``R = ||X - x||`` on [0, 1]: ``power`` has ``F(w) = w**gamma``;
    ``table`` interpolates a CDF given at increasing knots."""

    kind: str = "power"
    gamma: float = 1.0
    knots: Optional[tuple] = None
    cdf: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "power":
            if not self.gamma > 0:
                raise ConfigError("radial law needs gamma > 0")
        elif self.kind == "table":
            w = np.asarray(self.knots, dtype=np.float64)
            F = np.asarray(self.cdf, dtype=np.float64)
            if w.shape != F.shape or w.size < 2:
                raise ConfigError("table radial law needs matching knots and cdf of length >= 2")
            if w[0] != 0 or w[-1] != 1 or F[0] != 0 or F[-1] != 1:
                raise ConfigError("table CDF must run from (0, 0) to (1, 1)")
            if np.any(np.diff(w) <= 0) or np.any(np.diff(F) < 0):
                raise ConfigError("table knots must increase and the CDF must be nondecreasing")
        else:
            raise ConfigError(f"unknown radial law {self.kind!r}")

    def F(self, w):
        w = np.clip(np.asarray(w, dtype=np.float64), 0.0, 1.0)
        if self.kind == "power":
            return w ** self.gamma
        return np.interp(w, self.knots, self.cdf)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        v = rng.random(n)
        if self.kind == "power":
            return v ** (1.0 / self.gamma)
        return np.interp(v, self.cdf, self.knots)


def sine_basis(grid, count: int) -> np.ndarray:
    j = np.arange(1, count + 1)[:, None]
    return math.sqrt(2.0) * np.sin(np.pi * j * np.asarray(grid)[None, :])


@dataclass(frozen=True)
class DesignConfig:
    """Synthetic radial design around ``center``.

    ``fixed_direction`` uses one unit direction for every draw (default: the
    normalized constant curve); ``symmetric_random`` normalizes a Gaussian
    combination of ``n_basis`` sine functions, a law invariant under
    ``U -> -U``.
    """

    center: Curve = field(default_factory=lambda: Curve.constant(0.0))
    radial_law: RadialLaw = field(default_factory=RadialLaw)
    direction_law: str = "symmetric_random"
    direction: Optional[Curve] = None
    n_basis: int = 8
    noise_sigma: float = 0.0
    n: int = 100
    metric: SemiMetricSpec = L2

    def __post_init__(self):
        if self.direction_law not in DIRECTION_LAWS:
            raise ConfigError(f"unknown direction law {self.direction_law!r}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.n_basis < 1:
            raise ConfigError("n_basis must be positive")
        if self.direction is not None and not self.direction.same_grid(self.center):
            raise ConfigError("direction and center must share a grid")
        if self.direction_law == "fixed_direction":
            norm = self.metric.norm(self.raw_direction[None, :], self.grid)[0]
            if not norm > 0:
                raise ConfigError("fixed direction has zero norm under the design metric")

    @property
    def grid(self) -> np.ndarray:
        return self.center.grid

    @property
    def raw_direction(self) -> np.ndarray:
        if self.direction is None:
            if self.metric.kind == "l2_derivative":
                return self.grid.copy()
            return np.ones_like(self.grid)
        return self.direction.values

    @property
    def unit_direction(self) -> np.ndarray:
        d = self.raw_direction
        return d / self.metric.norm(d[None, :], self.grid)[0]

    def replace(self, **changes) -> "DesignConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class DataSet:
    """Curves as an ``(n, grid)`` array with responses and cached
    distances ``W_i = ||X_i - x||`` to the design center."""

    grid: np.ndarray
    curves: np.ndarray
    responses: np.ndarray
    distances_to_center: np.ndarray
    center: Curve

    def __len__(self):
        return len(self.responses)

    def curve(self, i: int) -> Curve:
        return Curve(self.grid, self.curves[i])

    def __iter__(self):
        return (self.curve(i) for i in range(len(self)))

    @classmethod
    def from_curves(cls, curves: Sequence[Curve], responses, center: Curve, metric: SemiMetricSpec = L2):
        arr = np.array([c.values for c in curves], dtype=np.float64).reshape(len(curves), len(center.grid))
        for c in curves:
            if not c.same_grid(center):
                raise ValueError("all curves must share the center's grid")
        return cls(center.grid, arr, np.asarray(responses, dtype=np.float64),
                   metric.distances(arr, center.values, center.grid), center)

    @classmethod
    def from_distances(cls, distances, responses, grid=None):
        """Curves ``d_i * 1`` around the zero curve, so the L2 (and sup)
        distance to the center is ``d_i``.  Handy for estimator tests."""
        g = uniform_grid() if grid is None else grid
        d = np.asarray(distances, dtype=np.float64)
        center = Curve.constant(0.0, g)
        curves = d[:, None] * np.ones(len(g))[None, :]
        return cls(center.grid, curves, np.asarray(responses, dtype=np.float64), d.copy(), center)

    def equals(self, other: "DataSet") -> bool:
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("grid", "curves", "responses", "distances_to_center")
        )


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by an int or a tuple of ints."""
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = list(seed) if isinstance(seed, (tuple, list)) else int(seed)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def generate_radial_dataset(cfg: DesignConfig, seed, model: RegressionModel = None) -> DataSet:
    """Draw ``n`` pairs ``(X_i, Y_i)`` from the radial design.

    Draw order (fixed, part of the reproducibility contract): radii,
    direction coefficients (random law only), noise.
    """
    model = model or RegressionModel("constant")
    rng = make_rng(seed)
    n, grid, x = cfg.n, cfg.grid, cfg.center.values
    radii = cfg.radial_law.sample(rng, n)
    if cfg.direction_law == "fixed_direction":
        dirs = np.broadcast_to(cfg.unit_direction, (n, len(grid)))
    else:
        coef = rng.standard_normal((n, cfg.n_basis))
        raw = coef @ sine_basis(grid, cfg.n_basis)
        dirs = raw / cfg.metric.norm(raw, grid)[:, None]
    curves = x[None, :] + radii[:, None] * dirs
    responses = eval_regression_many(model, curves, grid)
    if cfg.noise_sigma > 0:
        responses = responses + cfg.noise_sigma * rng.standard_normal(n)
    dist = cfg.metric.distances(curves, x, grid)
    return DataSet(grid, curves, responses, dist, cfg.center)


def drift_varphi(model: RegressionModel, design: DesignConfig, u: float) -> float:
    """``E{r(X) - r(x) | ||X - x|| = u}`` in closed form."""
    if model.kind == "constant":
        return 0.0
    w = trapezoid_weights(design.grid)
    a = model["a"]
    if design.direction_law == "fixed_direction":
        U = design.unit_direction
        if model.kind == "integral_linear":
            return float(a * u * (w @ U))
        x = design.center.values
        return float(a * (2.0 * u * (w @ (x * U)) + u * u * (w @ (U * U))))
    if model.kind == "integral_linear":
        return 0.0
    if design.metric.kind == "l2":
        # unit trapezoid-L2 directions: int U^2 = 1, cross term averages out
        return float(a * u * u)
    raise UnsupportedError(
        f"no closed-form drift for {model.kind} with symmetric_random directions under {design.metric.kind}"
    )


def write_dataset_csv(path, data: DataSet):
    """One row per curve: response, then the values on the grid. The header
    carries the grid abscissae."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["response"] + [repr(float(t)) for t in data.grid])
        for y, row in zip(data.responses, data.curves):
            w.writerow([repr(float(y))] + [repr(float(v)) for v in row])


def write_curves_csv(path, curves: Sequence[Curve], responses=None):
    grid = curves[0].grid
    responses = np.zeros(len(curves)) if responses is None else responses
    arr = np.array([c.values for c in curves])
    write_dataset_csv(path, DataSet(grid, arr, np.asarray(responses, float), np.zeros(len(curves)), curves[0]))


def read_curves_csv(path):
    """Inverse of :func:`write_dataset_csv`; returns ``(grid, responses, values)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "response":
        raise ConfigError(f"{path}: header row must start with 'response'")
    grid = _check_grid([float(t) for t in rows[0][1:]])
    body = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
    if body.size == 0:
        raise ConfigError(f"{path}: no curves")
    if body.shape[1] != len(grid) + 1:
        raise ConfigError(f"{path}: rows must have {len(grid) + 1} columns")
    return grid, body[:, 0], body[:, 1:]
