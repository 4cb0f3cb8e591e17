"""Model-violation diagnostics and estimator-quality metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import DofNonPositive, LengthMismatch
from .models import Dataset
from .regularization import default_epsilon, reg_log, reg_probability

__all__ = [
    "ModelViolation",
    "EstimatorStats",
    "MomentAccumulator",
    "model_violation",
    "log_likelihood",
    "estimator_stats",
]


@dataclass(frozen=True)
class ModelViolation:
    chi2: float
    dof: int
    n_sigma: float

    @classmethod
    def from_chi2(cls, chi2: float, dof: int) -> "ModelViolation":
        if dof < 1:
            raise DofNonPositive(f"degrees of freedom must be >= 1, got {dof}")
        return cls(float(chi2), int(dof), (chi2 - dof) / math.sqrt(2.0 * dof))


def model_violation(
    data: Dataset, predictions, n_params: int, epsilon: float | None = None
) -> ModelViolation:
    """Chi-squared of the data against binomial variances at the predictions.

    ``n_sigma = (chi2 - dof) / sqrt(2 dof)`` with ``dof = m - n_params``; it
    is approximately standard normal when the model describes the data.
    Variances use the regularized predictions so that predictions at or
    beyond 0 and 1 stay finite.
    """
    predictions = np.asarray(predictions, dtype=float)
    if predictions.shape != (data.m,):
        raise LengthMismatch(f"{predictions.size} predictions for {data.m} datapoints")
    dof = data.m - n_params
    if dof < 1:
        raise DofNonPositive(f"{data.m} datapoints leave no degrees of freedom for {n_params} parameters")
    eps = default_epsilon(data.shots) if epsilon is None else epsilon
    r = reg_probability(predictions, eps)
    chi2 = data.shots * math.fsum((data.y - predictions) ** 2 / (r * (1.0 - r)))
    return ModelViolation.from_chi2(chi2, dof)


def log_likelihood(data: Dataset, predictions, epsilon: float | None = None) -> float:
    """Binomial log-likelihood of the counts, including the binomial coefficients."""
    p = np.asarray(predictions, dtype=float)
    if p.shape != (data.m,):
        raise LengthMismatch(f"{p.size} predictions for {data.m} datapoints")
    eps = default_epsilon(data.shots) if epsilon is None else epsilon
    n, k = data.shots, data.counts
    log_coeff = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    # zero counts contribute nothing, even where the log term is extreme
    hit = np.where(k > 0, k * reg_log(p, eps), 0.0)
    miss = np.where(n - k > 0, (n - k) * reg_log(1.0 - p, eps), 0.0)
    return math.fsum(log_coeff + hit + miss)


@dataclass(eq=False)
class EstimatorStats:
    """Bias, variance and likelihood of an estimator over a simulation ensemble.

    ``variance`` is the mean squared distance ``|theta_s - theta|^2`` over the
    whole parameter vector. ``mean``, ``std``, ``bias_se`` and
    ``bias_over_std`` are per-parameter summaries (``std`` with ``ddof=1``).
    """

    bias: np.ndarray
    variance: float
    mean_log_likelihood: float
    n_simulations: int
    per_sim_estimates: np.ndarray
    mean: np.ndarray = field(default=None)
    std: np.ndarray = field(default=None)
    bias_se: np.ndarray = field(default=None)
    bias_over_std: np.ndarray = field(default=None)


def _fsum_columns(a):
    return np.array([math.fsum(col) for col in np.asarray(a, dtype=float).T])


def estimator_stats(estimates, theta_true, likelihoods=None) -> EstimatorStats:
    """Ensemble metrics of ``estimates`` (one row per simulation) against ``theta_true``.

    Sums are exactly rounded (``math.fsum``), so the result does not depend
    on the order of the rows.
    """
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    theta_true = np.asarray(theta_true, dtype=float)
    if est.shape[1] != theta_true.size:
        raise LengthMismatch(f"estimates have {est.shape[1]} columns, truth has {theta_true.size}")
    s = est.shape[0]
    if s < 1:
        raise ValueError("need at least one simulation")
    dev = est - theta_true
    bias = _fsum_columns(dev) / s
    variance = math.fsum((dev**2).ravel()) / s
    mean = _fsum_columns(est) / s
    if s > 1:
        std = np.sqrt(_fsum_columns((est - mean) ** 2) / (s - 1))
    else:
        std = np.zeros_like(mean)
    if likelihoods is None:
        mean_ll = math.nan
    else:
        mean_ll = math.fsum(np.asarray(likelihoods, dtype=float)) / s
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(std > 0, bias / np.where(std > 0, std, 1.0), np.nan)
    return EstimatorStats(
        bias=bias,
        variance=variance,
        mean_log_likelihood=mean_ll,
        n_simulations=s,
        per_sim_estimates=est,
        mean=mean,
        std=std,
        bias_se=std / math.sqrt(s),
        bias_over_std=ratio,
    )


class MomentAccumulator:
    """Exact running count, sum and sum of squares of parameter deviations.

    Values are accumulated as exact rationals, so :meth:`merge` is exactly
    associative and commutative: partial ensembles computed in any order or
    on any worker combine to the same bits.
    """

    def __init__(self, theta_true):
        self.theta_true = np.asarray(theta_true, dtype=float)
        n = self.theta_true.size
        self.count = 0
        self.sums = [Fraction(0)] * n
        self.sumsq = [Fraction(0)] * n

    def add(self, estimate) -> None:
        dev = np.asarray(estimate, dtype=float) - self.theta_true
        self.count += 1
        for i, d in enumerate(dev):
            f = Fraction(float(d))
            self.sums[i] += f
            self.sumsq[i] += f * f

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        out = MomentAccumulator(self.theta_true)
        out.count = self.count + other.count
        out.sums = [a + b for a, b in zip(self.sums, other.sums)]
        out.sumsq = [a + b for a, b in zip(self.sumsq, other.sumsq)]
        return out

    @property
    def bias(self) -> np.ndarray:
        return np.array([float(s / self.count) for s in self.sums])

    @property
    def variance(self) -> float:
        return float(sum(self.sumsq) / self.count)
