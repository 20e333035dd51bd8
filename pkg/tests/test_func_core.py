import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from funcldp.errors import ConfigError, UnsupportedError
from funcldp.func_core import (
    L2,
    Curve,
    DataSet,
    DesignConfig,
    RadialLaw,
    RegressionModel,
    SemiMetricSpec,
    drift_varphi,
    eval_regression,
    generate_radial_dataset,
    read_curves_csv,
    semi_metric_distance,
    trapezoid_weights,
    uniform_grid,
    write_dataset_csv,
)

METRICS = [SemiMetricSpec(k) for k in ("l2", "sup", "l2_derivative")]


def test_curve_invariants(grid):
    with pytest.raises(ValueError):
        Curve(np.array([0.0, 0.5]), np.zeros(2))
    with pytest.raises(ValueError):
        Curve(np.array([0.0, 0.6, 0.5, 1.0]), np.zeros(4))
    with pytest.raises(ValueError):
        Curve(grid, np.zeros(grid.size - 1))
    with pytest.raises(ValueError):
        Curve(grid, np.full(grid.size, np.nan))


def test_trapezoid_weights_sum_to_one():
    g = np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(0).random(40)]))
    assert math.isclose(trapezoid_weights(g).sum(), 1.0, rel_tol=1e-15)


def test_distance_examples(grid):
    f = Curve(grid, np.sin(grid))
    assert semi_metric_distance(f, f) == 0.0
    assert semi_metric_distance(Curve.constant(0.0, grid), Curve.constant(1.0, grid)) == pytest.approx(1.0, abs=1e-15)
    fine = uniform_grid(1001)
    d = semi_metric_distance(Curve(fine, fine), Curve.constant(0.0, fine))
    assert abs(d - math.sqrt(1.0 / 3.0)) < 1e-6


def test_sup_and_derivative_metrics(grid):
    a, b = Curve(grid, grid), Curve.constant(0.0, grid)
    assert semi_metric_distance(a, b, SemiMetricSpec("sup")) == 1.0
    # derivative semi-metric ignores vertical shifts
    assert semi_metric_distance(Curve.constant(3.0, grid), b, SemiMetricSpec("l2_derivative")) == 0.0
    assert semi_metric_distance(a, b, SemiMetricSpec("l2_derivative")) == pytest.approx(1.0, abs=1e-12)


def test_mismatched_grid_is_error(grid):
    with pytest.raises(ValueError):
        semi_metric_distance(Curve.constant(0.0, grid), Curve.constant(0.0, uniform_grid(11)))


def test_unknown_metric():
    with pytest.raises(ConfigError):
        SemiMetricSpec("l7")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(METRICS))
def test_semimetric_axioms(seed, m):
    g = uniform_grid(51)
    r = np.random.default_rng(seed)
    a, b, c = (Curve(g, r.normal(size=g.size)) for _ in range(3))
    dab = semi_metric_distance(a, b, m)
    assert dab >= 0
    assert semi_metric_distance(a, a, m) == 0
    assert dab == pytest.approx(semi_metric_distance(b, a, m), rel=1e-14, abs=1e-15)
    assert semi_metric_distance(a, c, m) <= dab + semi_metric_distance(b, c, m) + 1e-12


def test_eval_regression_examples(grid):
    assert eval_regression(RegressionModel("constant", {"c": 2.0}), Curve(grid, grid)) == 2.0
    lin = RegressionModel("integral_linear", {"a": 3.0})
    assert eval_regression(lin, Curve.constant(1.0, grid)) == pytest.approx(3.0, abs=1e-14)
    assert eval_regression(RegressionModel("integral_linear"), Curve(grid, grid)) == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("model", [
    RegressionModel("constant", {"c": 1.5}),
    RegressionModel("integral_linear", {"a": -2.0, "b": 0.3}),
    RegressionModel("integral_quadratic", {"a": 0.7, "radius": 1.0}),
])
@pytest.mark.parametrize("metric", [SemiMetricSpec("l2"), SemiMetricSpec("sup")])
def test_lipschitz_property(model, metric, grid):
    r = np.random.default_rng(99)
    C = model.lipschitz_constant(metric)
    beta = model.lipschitz_exponent
    for _ in range(1000):
        raw = r.normal(size=(2, grid.size)) * r.uniform(0.01, 3)
        if model.kind == "integral_quadratic":
            # declared constant is valid on the ball of the declared radius
            raw = raw / np.maximum(1.0, metric.norm(raw, grid) / model["radius"])[:, None]
        a, b = Curve(grid, raw[0]), Curve(grid, raw[1])
        lhs = abs(eval_regression(model, a) - eval_regression(model, b))
        assert lhs <= C * semi_metric_distance(a, b, metric) ** beta + 1e-12


def test_lipschitz_unsupported_for_derivative_metric():
    with pytest.raises(UnsupportedError):
        RegressionModel("integral_linear").lipschitz_constant(SemiMetricSpec("l2_derivative"))


def test_constant_noiseless_responses():
    cfg = DesignConfig(n=200)
    data = generate_radial_dataset(cfg, 1, RegressionModel("constant", {"c": 4.25}))
    assert np.all(data.responses == 4.25)


@pytest.mark.parametrize("law", ["fixed_direction", "symmetric_random"])
@pytest.mark.parametrize("metric", METRICS)
def test_cached_distances_match_radii(law, metric):
    cfg = DesignConfig(n=300, direction_law=law, metric=metric)
    data = generate_radial_dataset(cfg, 5)
    recomputed = metric.distances(data.curves, data.center.values, data.grid)
    np.testing.assert_allclose(data.distances_to_center, recomputed, atol=1e-12, rtol=0)
    radii = RadialLaw().sample(np.random.Generator(np.random.Philox(np.random.SeedSequence(5))), 300)
    np.testing.assert_allclose(data.distances_to_center, radii, atol=1e-12)


def test_radial_law_ks_uniform():
    n = 20000
    data = generate_radial_dataset(DesignConfig(n=n), 2024)
    ks = stats.kstest(data.distances_to_center, "uniform").statistic
    assert ks < 1.63 / math.sqrt(n)


@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_radial_law_ks_power(gamma):
    n = 20000
    data = generate_radial_dataset(DesignConfig(n=n, radial_law=RadialLaw("power", gamma)), 77)
    ks = stats.kstest(data.distances_to_center, lambda w: np.clip(w, 0, 1) ** gamma).statistic
    assert ks < 1.63 / math.sqrt(n)


def test_table_radial_law():
    law = RadialLaw("table", knots=(0.0, 0.5, 1.0), cdf=(0.0, 0.25, 1.0))
    data = generate_radial_dataset(DesignConfig(n=20000, radial_law=law), 3)
    ks = stats.kstest(data.distances_to_center, law.F).statistic
    assert ks < 1.63 / math.sqrt(20000)
    with pytest.raises(ConfigError):
        RadialLaw("table", knots=(0.0, 1.0), cdf=(0.0, 0.5))


def test_determinism_same_seed():
    cfg = DesignConfig(n=100, noise_sigma=1.0)
    model = RegressionModel("integral_linear")
    a = generate_radial_dataset(cfg, (9, 100, 3), model)
    b = generate_radial_dataset(cfg, (9, 100, 3), model)
    c = generate_radial_dataset(cfg, (9, 100, 4), model)
    assert a.equals(b)
    assert not a.equals(c)


def test_symmetric_directions_have_unit_norm_and_zero_mean():
    cfg = DesignConfig(n=20000)
    data = generate_radial_dataset(cfg, 11)
    dirs = (data.curves - data.center.values) / data.distances_to_center[:, None]
    np.testing.assert_allclose(L2.norm(dirs, data.grid), 1.0, atol=1e-12)
    assert np.max(np.abs(dirs.mean(axis=0))) < 0.05


def test_drift_examples(grid):
    const = RegressionModel("constant", {"c": 3.0})
    lin = RegressionModel("integral_linear", {"a": 1.0})
    sym = DesignConfig()
    fixed = DesignConfig(direction_law="fixed_direction")
    assert drift_varphi(const, sym, 0.4) == 0.0
    assert drift_varphi(lin, sym, 0.4) == 0.0
    assert drift_varphi(lin, fixed, 0.3) == pytest.approx(0.3, abs=1e-14)


def test_drift_matches_monte_carlo():
    """Closed-form drift against an average over simulated directions."""
    center = Curve.from_function(lambda t: np.cos(3 * t))
    quad = RegressionModel("integral_quadratic", {"a": 1.3, "radius": 3.0})
    u = 0.4
    for law in ("fixed_direction", "symmetric_random"):
        cfg = DesignConfig(center=center, direction_law=law, n=40000,
                           radial_law=RadialLaw("table", knots=(0.0, u - 1e-9, u + 1e-9, 1.0),
                                                cdf=(0.0, 0.0, 1.0, 1.0)))
        data = generate_radial_dataset(cfg, 8, quad)
        mc = np.mean(data.responses) - eval_regression(quad, center)
        se = np.std(data.responses) / math.sqrt(cfg.n)
        assert abs(mc - drift_varphi(quad, cfg, u)) < 4 * se + 1e-8


def test_drift_at_zero_is_zero():
    models = [RegressionModel(k) for k in ("constant", "integral_linear", "integral_quadratic")]
    for law in ("fixed_direction", "symmetric_random"):
        for model in models:
            assert drift_varphi(model, DesignConfig(direction_law=law), 0.0) == 0.0


def test_drift_unsupported_pair():
    with pytest.raises(UnsupportedError):
        drift_varphi(RegressionModel("integral_quadratic"), DesignConfig(metric=SemiMetricSpec("sup")), 0.2)


def test_zero_norm_fixed_direction_rejected(grid):
    with pytest.raises(ConfigError):
        DesignConfig(direction_law="fixed_direction", direction=Curve.constant(1.0, grid),
                     metric=SemiMetricSpec("l2_derivative"))


def test_csv_round_trip(tmp_path):
    data = generate_radial_dataset(DesignConfig(n=7, noise_sigma=0.3), 4, RegressionModel("integral_linear"))
    path = tmp_path / "d.csv"
    write_dataset_csv(path, data)
    grid, y, values = read_curves_csv(path)
    np.testing.assert_array_equal(grid, data.grid)
    np.testing.assert_array_equal(y, data.responses)
    np.testing.assert_array_equal(values, data.curves)
    text = path.read_bytes()
    assert b"\r" not in text and text.startswith(b"response,0.0,")


def test_from_curves_matches_from_distances(grid):
    ds = DataSet.from_distances([0.1, 0.7], [1.0, 2.0], grid)
    again = DataSet.from_curves(list(ds), ds.responses, ds.center)
    np.testing.assert_allclose(again.distances_to_center, [0.1, 0.7], atol=1e-15)
