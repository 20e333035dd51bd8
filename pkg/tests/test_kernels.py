import math

import numpy as np
import pytest

from funcldp.errors import ConfigError, DomainError
from funcldp.kernels import (
    EXP_DECAY,
    LINEAR_DECAY,
    affine,
    custom,
    get_kernel,
    kernel_deriv,
    kernel_eval,
    validate_kernel,
)

SHIPPED = [LINEAR_DECAY, EXP_DECAY, affine(2.0, 1.0)]


def test_eval_examples():
    assert kernel_eval(LINEAR_DECAY, 0.0) == 1.0
    assert kernel_eval(LINEAR_DECAY, 2.0) == 0.0
    assert kernel_eval(EXP_DECAY, 1.0) == pytest.approx(0.3678794, abs=1e-7)


def test_deriv_examples():
    assert kernel_deriv(LINEAR_DECAY, 0.5) == -0.5
    assert kernel_deriv(EXP_DECAY, 0.0) == -1.0
    assert kernel_deriv(affine(2.0, 1.0), 0.9) == -1.0


def test_deriv_domain():
    with pytest.raises(DomainError):
        kernel_deriv(LINEAR_DECAY, 1.0)
    with pytest.raises(DomainError):
        kernel_deriv(EXP_DECAY, np.array([0.2, 1.5]))


@pytest.mark.parametrize("k", SHIPPED, ids=lambda k: k.label)
def test_shape_on_dense_probe_grid(k):
    u = np.linspace(0.0, 1.0, 10_000)
    assert np.all(kernel_eval(k, u) > 0)
    inner = u[1:-1]
    assert np.all(kernel_deriv(k, inner) < 0)
    # central differences at delta = 1e-5, kept inside [0, 1)
    v = np.linspace(1e-4, 1 - 1e-4, 10_000)
    delta = 1e-5
    fd = (kernel_eval(k, v + delta) - kernel_eval(k, v - delta)) / (2 * delta)
    np.testing.assert_allclose(fd, kernel_deriv(k, v), atol=1e-6)


@pytest.mark.parametrize("k", SHIPPED, ids=lambda k: k.label)
def test_zero_outside_support(k):
    out = np.array([-1e-12, -3.0, 1.0 + 1e-12, 7.0])
    assert np.all(kernel_eval(k, out) == 0.0)


def test_validate_linear_decay():
    rep = validate_kernel(LINEAR_DECAY, 64)
    assert rep.passed
    assert rep.lipschitz_constant == 0.5
    assert rep.to_dict()["failures"] == []


def test_validate_rejects_k1_zero():
    epan = custom(lambda u: 1 - u ** 2, lambda u: -2 * u, "1-u^2")
    rep = validate_kernel(epan, 32)
    assert not rep.K1_positive
    assert "K(1)>0" in rep.failures()
    # K'(0) = 0 alone is not a failure: the sign is checked on (0, 1)
    assert rep.derivative_negative


def test_validate_rejects_flat_kernel():
    flat = custom(lambda u: np.ones_like(u), lambda u: np.zeros_like(u), "flat")
    rep = validate_kernel(flat, 32)
    assert rep.failures() == ["K'<0"]


def test_validate_probe_size():
    with pytest.raises(ValueError):
        validate_kernel(LINEAR_DECAY, 8)


def test_get_kernel_by_name_and_object():
    assert get_kernel("linear_decay") is LINEAR_DECAY
    assert get_kernel({"kind": "affine", "a": 3, "b": 1}).K_at_1 == 2.0
    with pytest.raises(ConfigError):
        get_kernel("epanechnikov")
    with pytest.raises(ConfigError):
        affine(1.0, 2.0)
    assert math.isclose(EXP_DECAY.K_at_1, math.exp(-1))
