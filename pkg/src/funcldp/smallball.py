"""Small-ball models ``F_x(h) ~ ell(x) * phi(h)`` and the scaling limit zeta0."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

SMALLBALL_KINDS = ("fractal", "exponential_type", "empirical")


@dataclass(frozen=True)
class SmallBallModel:
    """Triple (ell, phi, zeta0) describing small-ball probabilities.

    fractal / empirical: ``phi(h) = c h**gamma`` and ``zeta0(u) = u**gamma``.
    exponential_type: ``phi(h) = exp(-h**(-p))`` whose ratio
    ``phi(u h) / phi(h)`` collapses to the indicator of ``u = 1``.

    ``ell_at`` maps an evaluation-point identifier to ``ell(x)``; the
    synthetic radial design places ``ell = 1`` at its center, key
    ``"center"``.
    """

    kind: str = "fractal"
    gamma: float = 1.0
    c: float = 1.0
    p: float = 1.0
    ell_at: dict = field(default_factory=lambda: {"center": 1.0}, compare=False)

    def __post_init__(self):
        if self.kind not in SMALLBALL_KINDS:
            raise ConfigError(f"unknown small-ball kind {self.kind!r}")
        if self.kind in ("fractal", "empirical") and not (self.gamma > 0 and self.c > 0):
            raise ConfigError("fractal small-ball model needs gamma > 0 and c > 0")
        if self.kind == "exponential_type" and not self.p > 0:
            raise ConfigError("exponential_type model needs p > 0")
        for key, val in self.ell_at.items():
            if not val > 0:
                raise ConfigError(f"ell({key}) must be positive, got {val}")

    @property
    def is_power_law(self) -> bool:
        return self.kind in ("fractal", "empirical")

    def ell(self, point="center") -> float:
        try:
            return float(self.ell_at[point])
        except KeyError:
            raise KeyError(f"no ell value stored for evaluation point {point!r}") from None

    def to_dict(self):
        out = {"kind": self.kind, "ell": self.ell_at.get("center", 1.0)}
        if self.is_power_law:
            out.update(gamma=self.gamma, c=self.c)
        else:
            out.update(p=self.p)
        return out


def fractal(gamma: float, c: float = 1.0, ell: float = 1.0) -> SmallBallModel:
    return SmallBallModel("fractal", gamma=gamma, c=c, ell_at={"center": ell})


def exponential_type(p: float = 1.0, ell: float = 1.0) -> SmallBallModel:
    return SmallBallModel("exponential_type", p=p, ell_at={"center": ell})


def empirical(gamma_hat: float, c_hat: float, ell: float = 1.0) -> SmallBallModel:
    return SmallBallModel("empirical", gamma=gamma_hat, c=c_hat, ell_at={"center": ell})


def from_config(spec: dict) -> SmallBallModel:
    """Build a model from ``{"kind": "fractal", "gamma": 1.0, "c": 1.0, "ell": 1.0}``."""
    if not isinstance(spec, dict):
        raise ConfigError("smallball must be an object")
    kind = spec.get("kind", "fractal")
    ell = float(spec.get("ell", 1.0))
    try:
        if kind in ("fractal", "empirical"):
            return SmallBallModel(kind, gamma=float(spec["gamma"]), c=float(spec.get("c", 1.0)),
                                  ell_at={"center": ell})
        if kind == "exponential_type":
            return exponential_type(float(spec.get("p", 1.0)), ell)
    except KeyError as exc:
        raise ConfigError(f"smallball.{exc.args[0]} is required for kind {kind!r}") from None
    raise ConfigError(f"unknown small-ball kind {kind!r}")


def phi(m: SmallBallModel, h):
    """phi(h) for h in (0, 1]."""
    arr = np.asarray(h, dtype=np.float64)
    if np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise DomainError("phi is defined for h in (0, 1]")
    if m.is_power_law:
        out = m.c * arr ** m.gamma
    else:
        out = np.exp(-(arr ** -m.p))
    return float(out) if out.ndim == 0 else out


def zeta0(m: SmallBallModel, u):
    """Limit of phi(u h) / phi(h) as h -> 0, for u in [0, 1]."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("zeta0 is defined for u in [0, 1]")
    if m.is_power_law:
        out = arr ** m.gamma
    else:
        out = (arr == 1.0).astype(np.float64)
    return float(out) if out.ndim == 0 else out


def zeta_h(m: SmallBallModel, u, h):
    """Finite-h ratio phi(u h) / phi(h); u = 0 maps to 0."""
    arr = np.asarray(u, dtype=np.float64)
    hu = arr * h
    with np.errstate(divide="ignore", over="ignore"):
        if m.is_power_law:
            out = arr ** m.gamma
        else:
            out = np.where(hu > 0, np.exp(-(np.where(hu > 0, hu, 1.0) ** -m.p) + h ** -m.p), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def fit_fractal_exponent(distances, h_grid):
    """Least-squares fit of ``log F(h) = log c + gamma log h``.

    ``F`` is the empirical CDF of ``distances``.  Grid points where the CDF
    is zero are dropped.  Returns ``(gamma_hat, c_hat)``.
    """
    d = np.sort(np.asarray(distances, dtype=np.float64))
    h = np.asarray(h_grid, dtype=np.float64)
    if d.size < 100:
        raise ValueError("need at least 100 distances")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if d[0] == d[-1]:
        raise ValueError("degenerate empirical CDF: all distances are equal")
    if np.any(h <= 0):
        raise ValueError("h_grid must be positive")
    F = np.searchsorted(d, h, side="right") / d.size
    keep = F > 0
    if keep.sum() < 3:
        raise ValueError("fewer than 3 grid points with nonzero empirical CDF")
    slope, intercept = np.polyfit(np.log(h[keep]), np.log(F[keep]), 1)
    return float(slope), float(np.exp(intercept))
