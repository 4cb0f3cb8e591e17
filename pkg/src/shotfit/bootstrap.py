"""Per-point probability and variance estimates used to build WLS weights.

The estimators here turn observed fractions (or model predictions) into a
fit target ``p`` and a variance ``variance`` for every datapoint. ``p`` is
the value the weighted fit is pulled towards; for the Jeffreys and Wilson
schemes it is shrunk towards 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .models import Dataset
from .regularization import reg_probability

__all__ = [
    "PointEstimates",
    "BOOTSTRAP_KINDS",
    "estimate_baseline",
    "estimate_jeffreys",
    "estimate_wilson",
    "estimate_prediction",
    "estimate",
    "variance_from_fraction",
]

BOOTSTRAP_KINDS = (
    "baseline",
    "jeffreys",
    "wilson",
    "prediction",
    "prediction+jeffreys",
    "prediction+wilson",
)
# variance floor of the unsafe baseline; only there so weights stay finite
UNSAFE_VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class PointEstimates:
    p: np.ndarray
    variance: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return 1.0 / self.variance


def _binomial_variance(p, shots):
    return p * (1.0 - p) / shots


def _jeffreys(fraction, shots):
    p = (shots * fraction + 0.5) / (shots + 1.0)
    return p, p * (1.0 - p) / (shots + 2.0)


def _wilson(fraction, shots, z=1.0):
    z2 = z * z
    denom = 1.0 + z2 / shots
    center = (fraction + z2 / (2.0 * shots)) / denom
    half_width = (z / denom) * np.sqrt(
        fraction * (1.0 - fraction) / shots + z2 / (4.0 * shots**2)
    )
    return center, half_width**2


def estimate_baseline(data: Dataset, epsilon: float, unsafe: bool = False) -> PointEstimates:
    """Observed fractions with the binomial variance ``y(1-y)/N``.

    The variance is evaluated at the regularized fraction so that points with
    ``y`` in {0, 1} keep a positive variance. ``unsafe=True`` uses the raw
    fraction instead, with only a tiny floor against division by zero.
    """
    y = data.y
    if unsafe:
        var = np.maximum(y * (1.0 - y), UNSAFE_VARIANCE_FLOOR) / data.shots
    else:
        r = reg_probability(y, epsilon)
        var = _binomial_variance(r, data.shots)
    return PointEstimates(p=y, variance=var)


def estimate_jeffreys(data: Dataset) -> PointEstimates:
    """Posterior mean and variance under a Jeffreys Beta(1/2, 1/2) prior."""
    p, var = _jeffreys(data.y, data.shots)
    return PointEstimates(p=p, variance=var)


def estimate_wilson(data: Dataset, z: float = 1.0) -> PointEstimates:
    """Centre of the Wilson score interval, variance from its squared half-width."""
    p, var = _wilson(data.y, data.shots, z)
    return PointEstimates(p=p, variance=var)


def estimate_prediction(
    data: Dataset, predicted, epsilon: float, combine: str | None = None
) -> PointEstimates:
    """Variances from model predictions (typically of an OLS fit).

    The fit target stays the observed fraction. Without ``combine`` the
    variance is the binomial variance at the regularized prediction. With
    ``combine`` in {"jeffreys", "wilson"} the regularized prediction is fed to
    that scheme as if it were the measured fraction and its variance is used.
    """
    predicted = np.asarray(predicted, dtype=float)
    if predicted.shape != (data.m,):
        raise LengthMismatch(f"{predicted.size} predictions for {data.m} datapoints")
    r = reg_probability(predicted, epsilon)
    if combine is None or combine == "baseline":
        var = _binomial_variance(r, data.shots)
    elif combine == "jeffreys":
        var = _jeffreys(r, data.shots)[1]
    elif combine == "wilson":
        var = _wilson(r, data.shots)[1]
    else:
        raise ValueError(f"cannot combine prediction with {combine!r}")
    return PointEstimates(p=data.y, variance=var)


def estimate(
    kind: str,
    data: Dataset,
    epsilon: float,
    predicted=None,
    unsafe_baseline: bool = False,
) -> PointEstimates:
    """Dispatch on a bootstrap name from :data:`BOOTSTRAP_KINDS`."""
    if kind == "baseline":
        return estimate_baseline(data, epsilon, unsafe=unsafe_baseline)
    if kind == "jeffreys":
        return estimate_jeffreys(data)
    if kind == "wilson":
        return estimate_wilson(data)
    if kind.startswith("prediction"):
        if predicted is None:
            raise ValueError(f"bootstrap {kind!r} needs model predictions")
        _, _, inner = kind.partition("+")
        return estimate_prediction(data, predicted, epsilon, combine=inner or None)
    raise ValueError(f"unknown bootstrap kind {kind!r}; choose from {BOOTSTRAP_KINDS}")


def variance_from_fraction(y, shots: int) -> dict[str, np.ndarray]:
    """Variance of a fraction ``y`` under the baseline, Jeffreys and Wilson schemes.

    Baseline is the raw ``y(1-y)/N`` without any floor.
    """
    y = np.asarray(y, dtype=float)
    return {
        "baseline": _binomial_variance(y, shots),
        "jeffreys": _jeffreys(y, shots)[1],
        "wilson": _wilson(y, shots)[1],
    }
