import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shotfit import (
    Dataset,
    DegenerateDataWarning,
    InsufficientData,
    ModelSpec,
    exponential_model,
    get_model,
    initial_guess,
    rabi_model,
    register_model,
    sine_model,
)
from shotfit.errors import LengthMismatch
from shotfit.models import MODEL_NAMES

from conftest import EXP_TRUTH, SINE_TRUTH, SINE_X, noiseless


def central_difference(model, x, theta):
    """Centered finite-difference Jacobian, step 1e-6 * max(1, |theta_i|)."""
    theta = np.asarray(theta, float)
    out = np.empty((x.size, theta.size))
    for i in range(theta.size):
        h = 1e-6 * max(1.0, abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        out[:, i] = (model.evaluate(x, up) - model.evaluate(x, down)) / (2 * h)
    return out


# valid parameter boxes per model; x drawn from the matching domain
RANGES = {
    "sine": ([(-0.5, 0.5), (0.1, 3.0), (-np.pi, np.pi), (0.0, 1.0)], (0.0, 4.0)),
    "exponential": ([(-0.2, 0.5), (-1.0, 1.0), (0.05, 4.0)], (0.0, 4.0)),
    "rabi": ([(0.0, 0.2), (0.1, 1.0), (0.3, 3.0), (-2.0, 2.0)], (-5.0, 5.0)),
    "rabi_free_angle": ([(0.0, 0.2), (0.1, 1.0), (0.3, 3.0), (-2.0, 2.0), (0.5, 2 * np.pi)], (-5.0, 5.0)),
}


def jacobian_relative_error(model, x, theta):
    analytic = model.jacobian(x, theta)
    numeric = central_difference(model, x, theta)
    return np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic)))


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_jacobian_matches_finite_differences(name):
    model = get_model(name)
    box, (xlo, xhi) = RANGES[name]
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        theta = np.array([rng.uniform(lo, hi) for lo, hi in box])
        x = rng.uniform(xlo, xhi, size=5)
        worst = max(worst, jacobian_relative_error(model, x, theta))
    assert worst <= 1e-5


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(MODEL_NAMES),
    st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5),
    st.floats(0.0, 1.0),
)
def test_jacobian_property(name, unit, ux):
    model = get_model(name)
    box, (xlo, xhi) = RANGES[name]
    theta = np.array([lo + u * (hi - lo) for u, (lo, hi) in zip(unit, box)])
    x = np.array([xlo + ux * (xhi - xlo)])
    assert jacobian_relative_error(model, x, theta) <= 1e-5


def test_sine_examples(sine):
    assert sine.evaluate(np.array([0.0]), SINE_TRUTH)[0] == pytest.approx(0.48 * math.sin(1.0) + 0.5, abs=1e-15)
    assert sine.evaluate(np.array([0.0]), SINE_TRUTH)[0] == pytest.approx(0.90390607, abs=1e-8)
    x = np.linspace(-3, 7, 11)
    assert np.all(sine.evaluate(x, [0.0, 1.7, 0.3, 0.5]) == 0.5)


def test_exponential_examples(exponential):
    assert exponential.evaluate(np.array([0.0]), [0.3, 0.4, 2.0])[0] == pytest.approx(0.7)
    assert exponential.evaluate(np.array([1e4]), [0.3, 0.4, 2.0])[0] == pytest.approx(0.3)
    jac = exponential.jacobian(np.array([1.0]), [0.1, 0.8, 2.0])[0]
    e2 = math.exp(-2.0)
    np.testing.assert_allclose(jac, [1.0, e2, -0.8 * e2], rtol=1e-14)


def test_rabi_examples(rabi):
    A, B, omega, omega0 = 0.05, 0.9, 1.3, 0.2
    on = rabi.evaluate(np.array([omega0]), [A, B, omega, omega0])[0]
    assert on == pytest.approx(A + B * math.sin(omega * math.pi / 2) ** 2)
    far = rabi.evaluate(np.array([1e6]), [A, B, omega, omega0])[0]
    assert far == pytest.approx(A, abs=1e-10)
    free = rabi_model(free_angle=True)
    x = np.linspace(-3, 3, 9)
    np.testing.assert_array_equal(free.evaluate(x, [A, B, omega, omega0, math.pi]), rabi.evaluate(x, [A, B, omega, omega0]))


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_evaluation_is_pure(name):
    model = get_model(name)
    box, (xlo, xhi) = RANGES[name]
    theta = np.array([(lo + hi) / 2 for lo, hi in box])
    x = np.linspace(xlo, xhi, 17)
    first = model.evaluate(x, theta)
    x_copy, theta_copy = x.copy(), theta.copy()
    assert first.tobytes() == model.evaluate(x, theta).tobytes()
    np.testing.assert_array_equal(x, x_copy)
    np.testing.assert_array_equal(theta, theta_copy)


@settings(max_examples=200, deadline=None)
@given(
    amp=st.floats(-0.5, 0.5),
    freq=st.floats(-5, 5),
    phase=st.floats(-10, 10),
    offset=st.floats(0, 1),
    x=st.floats(-100, 100),
)
def test_sine_stays_in_unit_interval(amp, freq, phase, offset, x):
    if abs(amp) + offset > 1 or offset - abs(amp) < 0:
        return
    f = sine_model().evaluate(np.array([x]), np.array([amp, freq, phase, offset]))[0]
    assert -1e-15 <= f <= 1 + 1e-15


def test_sine_canonical_form(sine):
    x = np.linspace(0, 4, 23)
    theta = np.array([-0.3, -1.2, 2.5, 0.5])
    canon = sine.canonical(theta)
    assert canon[0] > 0 and canon[1] > 0 and -np.pi < canon[2] <= np.pi
    np.testing.assert_allclose(sine.evaluate(x, canon), sine.evaluate(x, theta), atol=1e-14)


def test_sine_guess_within_20_percent(sine):
    data = noiseless(sine, SINE_TRUTH, SINE_X)
    guess = initial_guess(sine, data)
    assert np.all(np.abs(guess - SINE_TRUTH) <= 0.2 * np.abs(SINE_TRUTH))


def test_exponential_guess_gamma_within_30_percent(exponential):
    data = noiseless(exponential, EXP_TRUTH, SINE_X)
    guess = initial_guess(exponential, data)
    assert abs(guess[2] - 1.5) <= 0.3 * 1.5


def test_rabi_guess_is_close(rabi):
    x = np.linspace(-5, 5, 41)
    truth = np.array([0.05, 0.9, 1.0, 0.0])
    guess = initial_guess(rabi, noiseless(rabi, truth, x))
    np.testing.assert_allclose(guess, truth, atol=0.2)


def test_constant_data_is_flagged(sine):
    data = Dataset(SINE_X, np.full(23, 30), 60)
    with pytest.warns(DegenerateDataWarning):
        guess = initial_guess(sine, data)
    assert guess[0] == 0.0
    assert guess[3] == 0.5


def test_too_few_points(sine):
    with pytest.raises(InsufficientData):
        initial_guess(sine, Dataset([0.0, 1.0], [3, 4], 10))


def test_dataset_validation():
    with pytest.raises(LengthMismatch):
        Dataset([0.0, 1.0], [1], 10)
    with pytest.raises(ValueError):
        Dataset([0.0], [11], 10)
    with pytest.raises(ValueError):
        Dataset([0.0], [1], 0)
    with pytest.raises(ValueError):
        Dataset([np.nan], [1], 10)
    data = Dataset([0.0, 1.0, 2.0], [1, 2, 3], 4)
    np.testing.assert_array_equal(data.y, [0.25, 0.5, 0.75])
    assert data.take([2, 0]).counts.tolist() == [3, 1]
    with pytest.raises(ValueError):
        data.x[0] = 5.0


def test_register_model():
    line = ModelSpec(
        name="line",
        param_names=("a", "b"),
        evaluate=lambda x, th: th[0] + th[1] * x,
        jacobian=lambda x, th: np.column_stack([np.ones_like(x), x]),
        guess=lambda data: np.array([0.5, 0.0]),
    )
    register_model("line", lambda: line)
    assert get_model("line") is line
    with pytest.raises(KeyError):
        get_model("no-such-model")


def test_guess_never_warns_on_ordinary_data(exponential):
    data = noiseless(exponential, EXP_TRUTH, SINE_X, shots=100)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        initial_guess(exponential, data)
