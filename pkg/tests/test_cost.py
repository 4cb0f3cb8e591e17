import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar as golden

from shotfit import (
    CostFunction,
    Dataset,
    ModelSpec,
    RegularizationConfig,
    cost_chi2,
    cost_mle,
    cost_ols,
    cost_wls,
    estimate_jeffreys,
    irls_weights,
    sample_dataset,
    simulation_rng,
    sine_model,
)
from shotfit.errors import LengthMismatch, NonFiniteModel, NonPositiveWeight

from conftest import SINE_TRUTH, SINE_X, noiseless


def constant_model():
    """F(x, theta) = theta[0] everywhere; a single free prediction."""
    return ModelSpec(
        name="constant",
        param_names=("p",),
        evaluate=lambda x, th: np.full(np.shape(x), float(th[0])),
        jacobian=lambda x, th: np.ones((np.size(x), 1)),
        guess=lambda data: np.array([np.mean(data.y)]),
    )


def seeded_sine(sine, seed=11, shots=60):
    return sample_dataset(sine, SINE_TRUTH, SINE_X, shots, simulation_rng(seed, 0))


def test_ols_examples(sine):
    half = Dataset([0.0], [1], 2)
    assert cost_ols(constant_model(), half, [0.7]) == pytest.approx(0.04)
    data = noiseless(sine, SINE_TRUTH, SINE_X)
    assert cost_ols(sine, data, SINE_TRUTH) < 1e-17


def test_ols_matches_direct_summation(sine):
    data = seeded_sine(sine)
    theta = SINE_TRUTH + [0.01, -0.02, 0.03, 0.0]
    total = 0.0
    for xj, kj in zip(data.x.tolist(), data.counts.tolist()):
        f = theta[0] * math.sin(2 * math.pi * theta[1] * xj + theta[2]) + theta[3]
        total += (f - kj / 60) ** 2
    assert cost_ols(sine, data, theta) == pytest.approx(total, rel=1e-12)


def test_wls_examples(sine):
    one = Dataset([0.0], [1], 2)
    assert cost_wls(constant_model(), one, [0.6], [4.0]) == pytest.approx(0.04)
    data = seeded_sine(sine)
    est = estimate_jeffreys(data)
    total = 0.0
    for xj, kj, wj in zip(data.x.tolist(), data.counts.tolist(), est.weights.tolist()):
        f = 0.48 * math.sin(2 * math.pi * xj + 1.0) + 0.5
        total += wj * (f - kj / 60) ** 2
    assert cost_wls(sine, data, SINE_TRUTH, est.weights) == pytest.approx(total, rel=1e-12)
    with pytest.raises(NonPositiveWeight):
        cost_wls(sine, data, SINE_TRUTH, np.zeros(23))
    with pytest.raises(LengthMismatch):
        cost_wls(sine, data, SINE_TRUTH, np.ones(3))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.floats(-0.2, 0.2), min_size=4, max_size=4))
def test_unit_weight_wls_equals_ols(seed, delta):
    sine = sine_model()
    data = seeded_sine(sine, seed)
    theta = SINE_TRUTH + np.array(delta)
    assert cost_wls(sine, data, theta, np.ones(23)) == cost_ols(sine, data, theta)


def test_mle_examples():
    model = constant_model()
    m, n = 5, 40
    data = Dataset(np.arange(m), np.full(m, 20), n)
    reg = RegularizationConfig(0.05 / n, penalty="none")
    assert cost_mle(model, data, [0.5], reg) == pytest.approx(n * m * math.log(2), rel=1e-14)
    # predictions equal to fractions give the entropy bound
    counts = np.array([4, 13, 25, 31, 36])
    data = Dataset(np.arange(5), counts, n)
    y = counts / n
    entropy = -n * float(np.sum(y * np.log(y) + (1 - y) * np.log(1 - y)))
    free = ModelSpec("free", ("a",), lambda x, th: y.copy(), lambda x, th: np.zeros((5, 1)), lambda d: [0.0])
    assert cost_mle(free, data, [0.0], reg) == pytest.approx(entropy, rel=1e-13)


def test_mle_soft_penalty_is_added_once_per_point():
    eps = 1e-3
    n = 10
    data = Dataset([0.0, 1.0], [10, 10], n)
    soft = RegularizationConfig(eps, penalty="soft")
    none = RegularizationConfig(eps, penalty="none")
    model = constant_model()
    diff = cost_mle(model, data, [1.2], soft) - cost_mle(model, data, [1.2], none)
    assert diff == pytest.approx(2 * 0.2**2 / eps**3, rel=1e-12)


@pytest.mark.parametrize("k", [1, 7, 20, 33, 59])
def test_mle_minimum_at_measured_fraction(k):
    n = 60
    data = Dataset([0.0], [k], n)
    reg = RegularizationConfig(0.05 / n, penalty="none")
    model = constant_model()
    fn = lambda p: cost_mle(model, data, [p], reg)
    grid = np.linspace(0.005, 0.995, 199)
    i = int(np.argmin([fn(p) for p in grid]))
    res = golden(fn, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=1e-10)
    assert res.x == pytest.approx(k / n, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-0.5, 1.5), min_size=3, max_size=3), st.integers(1, 200))
def test_soft_penalty_only_raises_cost(preds, n):
    preds = np.array(preds)
    model = ModelSpec("fixed", ("a",), lambda x, th: preds.copy(), lambda x, th: np.zeros((3, 1)), lambda d: [0.0])
    data = Dataset([0.0, 1.0, 2.0], [0, n // 2, n], n)
    eps = 0.05 / n
    soft = cost_mle(model, data, [0.0], RegularizationConfig(eps, penalty="soft"))
    none = cost_mle(model, data, [0.0], RegularizationConfig(eps, penalty="none"))
    excess = np.maximum(preds - 1, 0) + np.maximum(-preds, 0)
    if np.all(excess == 0):
        assert soft == none
    else:
        assert soft >= none
        if np.max(excess) > 1e-6:
            assert soft > none


def test_chi2_examples():
    model = constant_model()
    data = Dataset([0.0], [50], 100)
    reg = RegularizationConfig(5e-4)
    assert cost_chi2(model, data, [0.6], reg) == pytest.approx(25 / 6, rel=1e-12)
    assert cost_chi2(model, data, [0.5], reg) == 0.0


def test_irls_weight_examples():
    model = constant_model()
    data = Dataset([0.0, 1.0], [50, 20], 100)
    reg = RegularizationConfig(1e-3)
    np.testing.assert_allclose(irls_weights(model, data, [0.5], reg), [400.0, 400.0])
    w = irls_weights(model, data, [1.5], reg)
    r = 1 - 1e-3 / 2
    np.testing.assert_allclose(w, 1 / (r * (1 - r) / 100))
    assert np.all(np.isfinite(w))


def test_non_finite_prediction_is_reported(sine):
    data = seeded_sine(sine)
    with pytest.raises(NonFiniteModel):
        cost_ols(sine, data, [np.inf, 1, 1, 0.5])


def fd_gradient(fn, theta, h=1e-7):
    g = np.empty(theta.size)
    for i in range(theta.size):
        e = np.zeros(theta.size)
        e[i] = h * max(1.0, abs(theta[i]))
        g[i] = (fn(theta + e) - fn(theta - e)) / (2 * e[i])
    return g


@pytest.mark.parametrize("kind", ["ols", "wls", "irls", "chi2", "mle"])
def test_gradient_consistent_with_differences(sine, kind):
    data = seeded_sine(sine, shots=100)
    reg = RegularizationConfig.for_shots(100)
    weights = estimate_jeffreys(data).weights if kind in ("wls", "irls") else None
    cost = CostFunction(kind, sine, data, reg=reg, weights=weights)
    theta = SINE_TRUTH + np.array([0.01, 0.02, -0.05, 0.01])
    analytic = cost.gradient(theta)
    numeric = fd_gradient(cost, theta)
    assert np.max(np.abs(analytic - numeric)) <= 1e-4 * max(1.0, np.max(np.abs(numeric)))


@pytest.mark.parametrize("kind", ["ols", "wls", "chi2"])
def test_residual_form_matches_scalar_cost(sine, kind):
    data = seeded_sine(sine)
    reg = RegularizationConfig.for_shots(60)
    weights = estimate_jeffreys(data).weights
    cost = CostFunction(kind, sine, data, reg=reg, weights=weights if kind == "wls" else None)
    theta = SINE_TRUTH * 1.01
    free = {"ols": cost_ols(sine, data, theta), "wls": cost_wls(sine, data, theta, weights),
            "chi2": cost_chi2(sine, data, theta, reg)}[kind]
    assert cost(theta) == pytest.approx(free, rel=1e-13)
    assert cost.residual_form
    r = cost.residuals(theta)
    assert float(r @ r) == pytest.approx(free, rel=1e-13)


def test_mle_has_no_residuals(sine):
    data = seeded_sine(sine)
    cost = CostFunction("mle", sine, data, reg=RegularizationConfig.for_shots(60))
    assert not cost.residual_form
    with pytest.raises(TypeError):
        cost.residuals(SINE_TRUTH)


def test_constructor_checks(sine):
    data = seeded_sine(sine)
    with pytest.raises(ValueError):
        CostFunction("wls", sine, data)
    with pytest.raises(ValueError):
        CostFunction("mle", sine, data)
    with pytest.raises(ValueError):
        CostFunction("huber", sine, data)


def test_costs_are_pure(sine):
    data = seeded_sine(sine)
    reg = RegularizationConfig.for_shots(60)
    theta = SINE_TRUTH.copy()
    values = [cost_mle(sine, data, theta, reg), cost_chi2(sine, data, theta, reg), cost_ols(sine, data, theta)]
    again = [cost_mle(sine, data, theta, reg), cost_chi2(sine, data, theta, reg), cost_ols(sine, data, theta)]
    assert values == again
    np.testing.assert_array_equal(theta, SINE_TRUTH)
