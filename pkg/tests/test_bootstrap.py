import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from shotfit import Dataset, estimate_baseline, estimate_jeffreys, estimate_prediction, estimate_wilson, reg_probability
from shotfit.bootstrap import BOOTSTRAP_KINDS, estimate, variance_from_fraction
from shotfit.errors import LengthMismatch


def one_point(k, shots):
    return Dataset([0.0], [k], shots)


def wilson_by_roots(k, n, z=1.0):
    """Solve (y - p)^2 = z^2 p (1 - p) / n for p; return centre and squared half-width."""
    y = k / n
    a = 1 + z * z / n
    b = -(2 * y + z * z / n)
    c = y * y
    lo, hi = sorted(np.roots([a, b, c]).real)
    return (lo + hi) / 2, ((hi - lo) / 2) ** 2


@pytest.mark.parametrize("k,n", [(0, 60), (1, 60), (17, 60), (30, 60), (60, 60), (3, 7), (500, 1000)])
def test_jeffreys_matches_beta_posterior(k, n):
    post = stats.beta(k + 0.5, n - k + 0.5)
    est = estimate_jeffreys(one_point(k, n))
    assert est.p[0] == pytest.approx(post.mean(), rel=1e-13)
    assert est.variance[0] == pytest.approx(post.var(), rel=1e-12)


def test_jeffreys_examples():
    est = estimate_jeffreys(one_point(0, 60))
    p = 0.5 / 61
    assert est.p[0] == pytest.approx(0.0081967, abs=1e-7)
    assert est.variance[0] == pytest.approx(p * (1 - p) / 62, rel=1e-14)
    top = estimate_jeffreys(one_point(60, 60))
    assert top.p[0] == pytest.approx(1 - p, rel=1e-14)
    assert top.variance[0] == pytest.approx(est.variance[0], rel=1e-12)
    assert estimate_jeffreys(one_point(30, 60)).p[0] == 0.5


@pytest.mark.parametrize("k,n", [(0, 60), (1, 60), (30, 60), (59, 60), (60, 60), (2, 5), (700, 1000)])
def test_wilson_matches_quadratic_roots(k, n):
    center, var = wilson_by_roots(k, n)
    est = estimate_wilson(one_point(k, n))
    assert est.p[0] == pytest.approx(center, rel=1e-10)
    assert est.variance[0] == pytest.approx(var, rel=1e-8)


def test_wilson_examples():
    assert estimate_wilson(one_point(0, 60)).p[0] == pytest.approx(1 / 122, rel=1e-14)
    assert estimate_wilson(one_point(60, 60)).p[0] == pytest.approx(121 / 122, rel=1e-14)
    for n in (2, 10, 1000):
        assert estimate_wilson(one_point(n // 2, n)).p[0] == pytest.approx(0.5, abs=1e-15)


def test_baseline_examples():
    assert estimate_baseline(one_point(50, 100), 5e-4).variance[0] == pytest.approx(0.0025)
    assert estimate_baseline(one_point(10, 50), 1e-3).variance[0] == pytest.approx(0.0032)
    eps = 0.05 / 60
    zero = estimate_baseline(one_point(0, 60), eps)
    r = eps / 2
    assert zero.variance[0] == pytest.approx(r * (1 - r) / 60, rel=1e-14)
    assert zero.p[0] == 0.0
    unsafe = estimate_baseline(one_point(0, 60), eps, unsafe=True)
    assert unsafe.variance[0] == pytest.approx(1e-12 / 60)


def test_prediction_examples():
    data = Dataset([0.0, 1.0, 2.0], [0, 500, 1000], 1000)
    est = estimate_prediction(data, [0.5, 0.5, 0.5], 5e-5)
    np.testing.assert_allclose(est.variance, 2.5e-4)
    np.testing.assert_array_equal(est.p, data.y)
    eps = 1e-3
    out = estimate_prediction(one_point(3, 10), [1.2], eps)
    r = 1 - eps / 2
    assert reg_probability(1.2, eps) == pytest.approx(r)
    assert out.variance[0] == pytest.approx(r * (1 - r) / 10, rel=1e-12)
    floor = estimate_prediction(one_point(0, 10), [0.0], eps)
    assert floor.variance[0] > 0
    with pytest.raises(LengthMismatch):
        estimate_prediction(data, [0.5], eps)


def test_prediction_combined_uses_inner_variance():
    data = Dataset([0.0, 1.0], [3, 8], 10)
    predicted = np.array([0.25, 0.9])
    jeff = estimate_prediction(data, predicted, 0.005, combine="jeffreys")
    p = (10 * predicted + 0.5) / 11
    np.testing.assert_allclose(jeff.variance, p * (1 - p) / 12, rtol=1e-14)
    np.testing.assert_array_equal(jeff.p, data.y)
    wil = estimate_prediction(data, predicted, 0.005, combine="wilson")
    roots = [wilson_by_roots(10 * q, 10)[1] for q in predicted]
    np.testing.assert_allclose(wil.variance, roots, rtol=1e-8)


def test_dispatcher():
    data = Dataset([0.0, 1.0], [3, 8], 10)
    for kind in BOOTSTRAP_KINDS:
        est = estimate(kind, data, 0.005, predicted=[0.3, 0.7])
        assert np.all(est.variance > 0)
    with pytest.raises(ValueError):
        estimate("prediction", data, 0.005)
    with pytest.raises(ValueError):
        estimate("bayes", data, 0.005)


@given(st.integers(1, 5000), st.floats(0, 1))
def test_jeffreys_shrinks_towards_half(n, u):
    k = int(round(u * n))
    est = estimate_jeffreys(one_point(k, n))
    assert abs(est.p[0] - 0.5) <= abs(k / n - 0.5) + 1e-15
    assert 0 < est.p[0] < 1


@given(st.integers(1, 5000), st.floats(0, 1))
def test_wilson_maps_into_open_interval(n, u):
    k = int(round(u * n))
    est = estimate_wilson(one_point(k, n))
    assert 0 < est.p[0] < 1
    assert abs(est.p[0] - 0.5) <= abs(k / n - 0.5) + 1e-15
    assert est.variance[0] > 0


@given(st.integers(1, 5000), st.floats(0, 1), st.floats(1e-6, 0.4))
def test_all_variances_positive(n, u, eps):
    data = one_point(int(round(u * n)), n)
    for kind in BOOTSTRAP_KINDS:
        assert estimate(kind, data, eps, predicted=[u]).variance[0] > 0


def test_variances_agree_at_large_shots():
    n = 10_000
    data = one_point(3000, n)
    eps = 0.05 / n
    ref = 0.3 * 0.7 / n
    for kind in BOOTSTRAP_KINDS:
        ratio = estimate(kind, data, eps, predicted=[0.3]).variance[0] / ref
        assert abs(ratio - 1) <= 0.05, kind


def test_variance_from_fraction_is_symmetric():
    y = np.linspace(0, 1, 101)
    table = variance_from_fraction(y, 100)
    for key, values in table.items():
        np.testing.assert_allclose(values, values[::-1], rtol=1e-12, atol=1e-18, err_msg=key)
    assert table["baseline"][0] == 0.0 and table["jeffreys"][0] > 0
    mid = 0.25 / 100
    for values in table.values():
        assert abs(values[50] / mid - 1) < 0.1
