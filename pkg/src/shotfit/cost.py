"""Cost functions for OLS, WLS, IRLS, MLE and the chi-squared proxy.

The free functions evaluate a cost at a single parameter vector. The
:class:`CostFunction` objects bundle the same costs with residuals,
Jacobians and gradients for the optimizers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import LengthMismatch, NonFiniteModel, NonPositiveWeight
from .models import Dataset, ModelSpec
from .regularization import (
    RegularizationConfig,
    reg_log,
    reg_log_derivative,
    reg_probability,
    reg_probability_derivative,
    soft_penalty_derivative,
)

__all__ = [
    "METHODS",
    "CostFunction",
    "predict",
    "cost_ols",
    "cost_wls",
    "cost_mle",
    "cost_chi2",
    "irls_weights",
    "make_cost",
]

Method = Literal["ols", "wls", "irls", "mle", "chi2"]
METHODS = ("ols", "wls", "irls", "mle", "chi2")
# lower bound on r(1-r)/N; r(p) >= eps/2 already keeps it positive
_VARIANCE_FLOOR = 1e-300


def predict(model: ModelSpec, data: Dataset, theta) -> np.ndarray:
    f = model.evaluate(data.x, np.asarray(theta, dtype=float))
    if not np.all(np.isfinite(f)):
        raise NonFiniteModel(f"{model.name} is not finite at theta={list(theta)}")
    return f


def _check_weights(weights, m):
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (m,):
        raise LengthMismatch(f"{weights.size} weights for {m} datapoints")
    if not np.all(weights > 0):
        raise NonPositiveWeight("weights must be strictly positive")
    return weights


def _model_variance(f, shots, epsilon):
    r = reg_probability(f, epsilon)
    return np.maximum(r * (1.0 - r) / shots, _VARIANCE_FLOOR), r


def cost_ols(model: ModelSpec, data: Dataset, theta) -> float:
    """Sum of squared residuals between predictions and measured fractions."""
    r = predict(model, data, theta) - data.y
    return float(np.dot(r, r))


def cost_wls(model: ModelSpec, data: Dataset, theta, weights, target=None) -> float:
    """Weighted sum of squares; ``target`` defaults to the measured fractions."""
    weights = _check_weights(weights, data.m)
    target = data.y if target is None else np.asarray(target, dtype=float)
    r = np.sqrt(weights) * (predict(model, data, theta) - target)
    return float(np.dot(r, r))


def _mle_terms(f, y, shots, reg):
    """Per-point negative log-likelihood (without the binomial coefficient)."""
    eps = reg.epsilon
    nll = -shots * (y * reg_log(f, eps) + (1.0 - y) * reg_log(1.0 - f, eps))
    return nll + reg.penalty_terms(f)


def cost_mle(model: ModelSpec, data: Dataset, theta, reg: RegularizationConfig) -> float:
    """Regularized negative binomial log-likelihood plus the prediction penalty.

    The penalty is added once per datapoint and is not multiplied by the
    number of shots.
    """
    f = predict(model, data, theta)
    return float(np.sum(_mle_terms(f, data.y, data.shots, reg)))


def cost_chi2(model: ModelSpec, data: Dataset, theta, reg: RegularizationConfig) -> float:
    """Squared residuals scaled by the binomial variance at the model prediction."""
    f = predict(model, data, theta)
    var, _ = _model_variance(f, data.shots, reg.epsilon)
    return float(np.sum((data.y - f) ** 2 / var))


def irls_weights(model: ModelSpec, data: Dataset, theta, reg: RegularizationConfig) -> np.ndarray:
    """Inverse binomial variance at the regularized current predictions."""
    f = predict(model, data, theta)
    var, _ = _model_variance(f, data.shots, reg.epsilon)
    return 1.0 / var


@dataclass(eq=False)
class CostFunction:
    """A cost bound to a model and dataset.

    For residual-form kinds (``ols``, ``wls``, ``irls``, ``chi2``) the cost
    equals ``sum(residuals(theta)**2)``. ``irls`` is the WLS cost with weights
    supplied by the caller and refreshed between solves.
    """

    kind: Method
    model: ModelSpec
    data: Dataset
    reg: RegularizationConfig | None = None
    weights: np.ndarray | None = None
    target: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.kind in ("wls", "irls"):
            if self.weights is None:
                raise ValueError(f"{self.kind} cost needs weights")
            self.weights = _check_weights(self.weights, self.data.m)
            self._sqrt_w = np.sqrt(self.weights)
        if self.kind in ("mle", "chi2", "irls") and self.reg is None:
            raise ValueError(f"{self.kind} cost needs a RegularizationConfig")
        self.target = self.data.y if self.target is None else np.asarray(self.target, float)

    @property
    def residual_form(self) -> bool:
        return self.kind != "mle"

    def residuals(self, theta) -> np.ndarray:
        f = self.model.evaluate(self.data.x, theta)
        if self.kind == "ols":
            return f - self.target
        if self.kind in ("wls", "irls"):
            return self._sqrt_w * (f - self.target)
        if self.kind == "chi2":
            var, _ = _model_variance(f, self.data.shots, self.reg.epsilon)
            return (f - self.target) / np.sqrt(var)
        raise TypeError("the MLE cost is not a sum of squares")

    def residual_jacobian(self, theta) -> np.ndarray:
        jac = self.model.jacobian(self.data.x, theta)
        if self.kind == "ols":
            return jac
        if self.kind in ("wls", "irls"):
            return self._sqrt_w[:, None] * jac
        if self.kind == "chi2":
            eps, shots = self.reg.epsilon, self.data.shots
            f = self.model.evaluate(self.data.x, theta)
            var, r = _model_variance(f, shots, eps)
            s = np.sqrt(var)
            dvar = (1.0 - 2.0 * r) * reg_probability_derivative(f, eps) / shots
            scale = 1.0 / s - (f - self.target) * dvar / (2.0 * var * s)
            return scale[:, None] * jac
        raise TypeError("the MLE cost is not a sum of squares")

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "mle":
            f = self.model.evaluate(self.data.x, theta)
            return float(np.sum(_mle_terms(f, self.target, self.data.shots, self.reg)))
        r = self.residuals(theta)
        return float(np.dot(r, r))

    def gradient(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind != "mle":
            return 2.0 * self.residual_jacobian(theta).T @ self.residuals(theta)
        eps, shots, y = self.reg.epsilon, self.data.shots, self.target
        f = self.model.evaluate(self.data.x, theta)
        dcost_df = -shots * (y * reg_log_derivative(f, eps) - (1.0 - y) * reg_log_derivative(1.0 - f, eps))
        if self.reg.penalty == "soft":
            dcost_df = dcost_df + soft_penalty_derivative(f, eps)
        return self.model.jacobian(self.data.x, theta).T @ dcost_df

    def fisher(self, theta) -> np.ndarray:
        """Expected Hessian of the MLE cost.

        Binomial Fisher information plus the Gauss-Newton curvature of the
        soft penalty at predictions outside [0, 1].
        """
        f = self.model.evaluate(self.data.x, theta)
        var, _ = _model_variance(f, self.data.shots, self.reg.epsilon)
        curvature = 1.0 / var
        if self.reg.penalty == "soft":
            outside = (f < 0.0) | (f > 1.0)
            curvature = curvature + np.where(outside, 2.0 / self.reg.epsilon**3, 0.0)
        jac = self.model.jacobian(self.data.x, theta)
        return jac.T @ (jac * curvature[:, None])


def make_cost(kind, model, data, reg=None, weights=None, target=None) -> CostFunction:
    return CostFunction(kind=kind, model=model, data=data, reg=reg, weights=weights, target=target)
