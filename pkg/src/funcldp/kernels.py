"""Decreasing kernels on [0, 1] with a strictly positive value at 1.

The estimator weights a response by ``K(d / h)``; a kernel here is zero
outside [0, 1], positive on [0, 1] and strictly decreasing on the open
interval.  Epanechnikov-type kernels (``K(1) = 0``) are deliberately not
shipped and fail :func:`validate_kernel`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError

KERNEL_NAMES = ("linear_decay", "exp_decay", "affine")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel descriptor.

    ``affine`` is ``K(u) = a - b u`` with ``a > b > 0``; ``linear_decay`` is
    the affine kernel with ``a = 1, b = 1/2``; ``exp_decay`` is ``exp(-u)``.
    ``custom`` wraps user callables and exists so that candidate kernels can
    be run through the validator.
    """

    kind: str
    a: float = 1.0
    b: float = 0.5
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    deriv: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind == "affine" and not (self.a > self.b > 0):
            raise ConfigError(f"affine kernel needs a > b > 0, got a={self.a}, b={self.b}")
        if self.kind == "custom" and (self.func is None or self.deriv is None):
            raise ConfigError("custom kernel needs func and deriv")
        if self.kind not in KERNEL_NAMES + ("custom",):
            raise ConfigError(f"unknown kernel kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "custom":
            return self.name or "custom"
        if self.kind == "affine":
            return f"affine(a={self.a:g},b={self.b:g})"
        return self.kind

    @property
    def K_at_1(self) -> float:
        return float(self._raw(np.array([1.0]))[0])

    @property
    def core_code(self):
        """(code, a, b) for the compiled summation loop, or None."""
        if self.kind in ("linear_decay", "affine"):
            return 0, float(self.a), float(self.b)
        if self.kind == "exp_decay":
            return 1, 0.0, 0.0
        return None

    def _raw(self, u):
        if self.kind in ("linear_decay", "affine"):
            return self.a - self.b * u
        if self.kind == "exp_decay":
            return np.exp(-u)
        return np.asarray(self.func(u), dtype=np.float64)

    def _raw_deriv(self, u):
        if self.kind in ("linear_decay", "affine"):
            return np.full_like(u, -self.b)
        if self.kind == "exp_decay":
            return -np.exp(-u)
        return np.asarray(self.deriv(u), dtype=np.float64)

    def __call__(self, u):
        return kernel_eval(self, u)


LINEAR_DECAY = KernelSpec("linear_decay")
EXP_DECAY = KernelSpec("exp_decay", a=0.0, b=0.0)


def affine(a: float, b: float) -> KernelSpec:
    return KernelSpec("affine", a=a, b=b)


def custom(func, deriv, name="custom") -> KernelSpec:
    return KernelSpec("custom", func=func, deriv=deriv, name=name)


def get_kernel(spec) -> KernelSpec:
    """Resolve a config value (name string or mapping) to a KernelSpec."""
    if isinstance(spec, KernelSpec):
        return spec
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"kernel must be a name or an object with 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind == "linear_decay":
        return LINEAR_DECAY
    if kind == "exp_decay":
        return EXP_DECAY
    if kind == "affine":
        try:
            return affine(float(spec["a"]), float(spec["b"]))
        except KeyError as exc:
            raise ConfigError(f"affine kernel missing field {exc.args[0]!r}") from None
    raise ConfigError(f"unknown kernel {kind!r}; expected one of {', '.join(KERNEL_NAMES)}")


def kernel_eval(k: KernelSpec, u):
    """K(u) on [0, 1] and 0 elsewhere.  Accepts scalars or arrays."""
    arr = np.asarray(u, dtype=np.float64)
    inside = (arr >= 0.0) & (arr <= 1.0)
    out = np.where(inside, k._raw(np.where(inside, arr, 0.0)), 0.0)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_deriv(k: KernelSpec, u):
    """Analytic K'(u) for u in [0, 1)."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any((arr < 0.0) | (arr >= 1.0)):
        raise DomainError("kernel derivative is defined on [0, 1) only")
    out = k._raw_deriv(arr)
    return float(out) if out.ndim == 0 else out


@dataclass
class ValidationReport:
    kernel: str
    positivity: bool
    K1_positive: bool
    derivative_negative: bool
    lipschitz_constant: float
    probe_grid_size: int
    K_at_1: float

    @property
    def passed(self) -> bool:
        return self.positivity and self.K1_positive and self.derivative_negative

    def failures(self):
        names = {
            "positivity": self.positivity,
            "K(1)>0": self.K1_positive,
            "K'<0": self.derivative_negative,
        }
        return [name for name, ok in names.items() if not ok]

    def to_dict(self):
        return {
            "kernel": self.kernel,
            "passed": self.passed,
            "clauses": {
                "positivity": self.positivity,
                "K(1)>0": self.K1_positive,
                "K'<0": self.derivative_negative,
                "lipschitz": math.isfinite(self.lipschitz_constant),
            },
            "lipschitz_constant": self.lipschitz_constant,
            "K_at_1": self.K_at_1,
            "probe_grid_size": self.probe_grid_size,
            "failures": self.failures(),
        }


def validate_kernel(k: KernelSpec, probe_grid_size: int = 1024) -> ValidationReport:
    """Probe the kernel conditions on a uniform grid.

    The derivative sign is checked on the open interval (0, 1) only, so a
    flat start ``K'(0) = 0`` is accepted.  The Lipschitz estimate is
    ``max |K'|`` over the probes.
    """
    if probe_grid_size < 16:
        raise ValueError("probe_grid_size must be at least 16")
    closed = np.linspace(0.0, 1.0, probe_grid_size)
    open_ = closed[1:-1]
    values = k._raw(closed)
    k1 = float(k._raw(np.array([1.0]))[0])
    d = k._raw_deriv(np.concatenate([[0.0], open_]))
    return ValidationReport(
        kernel=k.label,
        positivity=bool(np.all(values > 0.0)),
        K1_positive=k1 > 0.0,
        derivative_negative=bool(np.all(d[1:] < 0.0)),
        lipschitz_constant=float(np.max(np.abs(d))),
        probe_grid_size=probe_grid_size,
        K_at_1=k1,
    )
