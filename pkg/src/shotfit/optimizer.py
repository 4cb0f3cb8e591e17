"""Local optimizers and the fitting pipeline.

:func:`minimize_lm` is a Levenberg-Marquardt solver for sums of squares and
:func:`minimize_scalar` a BFGS minimizer with backtracking line search for
general smooth costs. :func:`fit` chains them: initial guess, OLS, then an
optional refinement with the selected method starting from the OLS result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from . import bootstrap as _bootstrap
from .cost import METHODS, CostFunction, irls_weights
from .errors import (
    FitError,
    InsufficientData,
    NonFiniteCost,
    NonFiniteResidual,
    ShotfitError,
)
from .models import Dataset, ModelSpec, initial_guess
from .regularization import PENALTY_KINDS, RegularizationConfig, default_epsilon

__all__ = [
    "OptimizerConfig",
    "Solution",
    "FitConfig",
    "FitResult",
    "minimize_lm",
    "minimize_scalar",
    "fit",
]


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 200
    gradient_tolerance: float = 1e-10
    step_tolerance: float = 1e-12
    lm_lambda_init: float = 1e-3
    lm_lambda_scale: float = 10.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("gradient_tolerance", "step_tolerance", "lm_lambda_init"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.lm_lambda_scale > 1:
            raise ValueError("lm_lambda_scale must exceed 1")


class Solution(NamedTuple):
    theta: np.ndarray
    converged: bool
    n_iter: int
    cost: float
    history: tuple  # cost after every accepted step, starting at theta0


def _relative_step(step, theta, tol):
    return np.all(np.abs(step) <= tol * (np.abs(theta) + tol))


def minimize_lm(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    jacobian_fn: Callable[[np.ndarray], np.ndarray],
    theta0,
    config: OptimizerConfig = OptimizerConfig(),
) -> Solution:
    """Minimize ``sum(residual_fn(theta)**2)`` by Levenberg-Marquardt.

    Damping is multiplicative on the diagonal of ``J^T J`` (Marquardt
    scaling). A step is accepted only if it lowers the cost, so the cost
    history is non-increasing. Terminates when the largest gradient
    component drops below ``gradient_tolerance``, when an accepted step is
    smaller than ``step_tolerance`` relative to ``theta`` or when the
    damping becomes so large that no step can make progress.
    """
    theta = np.array(theta0, dtype=float)
    r = residual_fn(theta)
    if not np.all(np.isfinite(r)):
        raise NonFiniteResidual("residuals are not finite at the starting point")
    cost = float(r @ r)
    history = [cost]
    lam = config.lm_lambda_init
    jac = jacobian_fn(theta)
    for it in range(1, config.max_iterations + 1):
        grad = jac.T @ r
        if np.max(np.abs(2.0 * grad), initial=0.0) <= config.gradient_tolerance:
            return Solution(theta, True, it - 1, cost, tuple(history))
        jtj = jac.T @ jac
        diag = np.maximum(np.diag(jtj), 1e-12 * max(1.0, np.max(np.diag(jtj))))
        while True:
            a = jtj + lam * np.diag(diag)
            try:
                step = np.linalg.solve(a, -grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(a, -grad, rcond=None)[0]
            trial = theta + step
            r_trial = residual_fn(trial)
            cost_trial = float(r_trial @ r_trial) if np.all(np.isfinite(r_trial)) else math.inf
            if cost_trial < cost:
                break
            if cost_trial == cost and np.all(trial == theta):
                return Solution(theta, True, it, cost, tuple(history))
            lam *= config.lm_lambda_scale
            if lam > 1e16:
                # no descent direction left at working precision
                converged = np.all(np.isfinite(r_trial)) and _relative_step(
                    step, theta, math.sqrt(config.step_tolerance)
                )
                if not np.isfinite(cost_trial) and not converged and not history[1:]:
                    raise NonFiniteResidual("residuals became non-finite and no retreat step succeeded")
                return Solution(theta, bool(converged), it, cost, tuple(history))
        small = _relative_step(step, theta, config.step_tolerance)
        theta, r, cost = trial, r_trial, cost_trial
        history.append(cost)
        lam = max(lam / config.lm_lambda_scale, 1e-12)
        if small:
            return Solution(theta, True, it, cost, tuple(history))
        jac = jacobian_fn(theta)
    grad = jac.T @ r
    done = np.max(np.abs(2.0 * grad), initial=0.0) <= config.gradient_tolerance
    return Solution(theta, bool(done), config.max_iterations, cost, tuple(history))


def _fd_gradient(cost_fn, theta):
    grad = np.empty_like(theta)
    for i in range(theta.size):
        h = 1e-6 * max(1.0, abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (cost_fn(up) - cost_fn(down)) / (2.0 * h)
    return grad


def minimize_scalar(
    cost_fn: Callable[[np.ndarray], float],
    theta0,
    config: OptimizerConfig = OptimizerConfig(),
    gradient_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    hessian0: np.ndarray | None = None,
) -> Solution:
    """BFGS with Armijo backtracking.

    Without ``gradient_fn`` central differences with step
    ``1e-6 * max(1, |theta_i|)`` are used. ``hessian0`` optionally seeds
    the inverse-Hessian approximation (it is inverted here); the identity is
    used otherwise.
    """
    theta = np.array(theta0, dtype=float)
    n = theta.size
    grad_fn = gradient_fn if gradient_fn is not None else (lambda t: _fd_gradient(cost_fn, t))
    f = float(cost_fn(theta))
    if not math.isfinite(f):
        raise NonFiniteCost("cost is not finite at the starting point")
    g = np.asarray(grad_fn(theta), dtype=float)
    h_inv = np.eye(n)
    if hessian0 is not None:
        try:
            h_inv = np.linalg.inv(hessian0 + 1e-12 * np.trace(hessian0) / n * np.eye(n))
            if not np.all(np.isfinite(h_inv)) or np.any(np.linalg.eigvalsh(0.5 * (h_inv + h_inv.T)) <= 0):
                h_inv = np.eye(n)
        except np.linalg.LinAlgError:
            h_inv = np.eye(n)
    initial_h = h_inv.copy()
    history = [f]
    for it in range(1, config.max_iterations + 1):
        if np.max(np.abs(g), initial=0.0) <= config.gradient_tolerance:
            return Solution(theta, True, it - 1, f, tuple(history))
        direction = -h_inv @ g
        slope = float(g @ direction)
        if not slope < 0:
            h_inv = initial_h.copy()
            direction = -h_inv @ g
            slope = float(g @ direction)
        alpha = 1.0
        accepted = False
        for _ in range(60):
            trial = theta + alpha * direction
            f_trial = float(cost_fn(trial))
            if math.isfinite(f_trial) and f_trial <= f + 1e-4 * alpha * slope:
                accepted = f_trial < f
                break
            alpha *= 0.5
        step = trial - theta
        if not accepted:
            # line search cannot reduce the cost any further at working precision
            decrement = -slope
            converged = decrement <= 1e-9 * max(1.0, abs(f)) or _relative_step(
                direction, theta, config.step_tolerance
            )
            return Solution(theta, bool(converged), it, f, tuple(history))
        g_new = np.asarray(grad_fn(trial), dtype=float)
        s, yv = step, g_new - g
        theta, f, g = trial, f_trial, g_new
        history.append(f)
        if _relative_step(s, theta, config.step_tolerance):
            return Solution(theta, True, it, f, tuple(history))
        sy = float(s @ yv)
        if sy > 1e-12 * float(np.sqrt((s @ s) * (yv @ yv))):
            rho = 1.0 / sy
            hy = h_inv @ yv
            h_inv = (
                h_inv
                - rho * (np.outer(s, hy) + np.outer(hy, s))
                + (rho * rho * float(yv @ hy) + rho) * np.outer(s, s)
            )
    done = np.max(np.abs(g), initial=0.0) <= config.gradient_tolerance
    return Solution(theta, bool(done), config.max_iterations, f, tuple(history))


# ------------------------------------------------------------------ pipeline


@dataclass(frozen=True)
class FitConfig:
    """Which cost to minimize and how its ingredients are built.

    ``bootstrap`` only matters for ``wls`` and ``penalty`` only for ``mle``.
    ``epsilon=None`` means ``0.05 / shots``.
    """

    method: str = "ols"
    bootstrap: str = "jeffreys"
    penalty: str = "soft"
    epsilon: float | None = None
    hard_penalty_value: float = 1e100
    unsafe_baseline: bool = False
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    irls_max_outer: int = 20
    irls_tolerance: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.bootstrap not in _bootstrap.BOOTSTRAP_KINDS:
            raise ValueError(f"unknown bootstrap {self.bootstrap!r}")
        if self.penalty not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty {self.penalty!r}")

    @property
    def label(self) -> str:
        if self.method == "wls":
            tail = self.bootstrap + ("!" if self.unsafe_baseline and self.bootstrap == "baseline" else "")
            return f"wls:{tail}"
        if self.method == "mle":
            return f"mle:{self.penalty}"
        return self.method

    @classmethod
    def from_label(cls, label: str, **kwargs) -> "FitConfig":
        """Parse ``"ols"``, ``"wls:jeffreys"``, ``"mle:soft"``, ``"wls:baseline!"`` ..."""
        method, _, option = label.strip().lower().partition(":")
        if method == "wls" and option:
            if option.endswith("!"):
                option = option[:-1]
                kwargs.setdefault("unsafe_baseline", True)
            kwargs.setdefault("bootstrap", option)
        elif method == "mle" and option:
            kwargs.setdefault("penalty", option)
        elif option:
            raise ValueError(f"method {method!r} takes no option, got {label!r}")
        return cls(method=method, **kwargs)

    def regularization(self, shots: int) -> RegularizationConfig:
        eps = default_epsilon(shots) if self.epsilon is None else self.epsilon
        return RegularizationConfig(eps, self.penalty, self.hard_penalty_value)


@dataclass(eq=False)
class FitResult:
    theta: np.ndarray
    cost: float
    method: str
    converged: bool
    n_iterations: int
    chi2: float
    n_sigma: float
    predictions: np.ndarray
    param_names: tuple = ()
    message: str = ""

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(self.param_names, map(float, self.theta)))


def _finish(model, data, theta, cost, label, converged, n_iter, reg, message=""):
    from .statistics import model_violation

    theta = model.canonical(np.asarray(theta, dtype=float))
    predictions = model.evaluate(data.x, theta)
    if data.m > model.n_params:
        mv = model_violation(data, predictions, model.n_params, epsilon=reg.epsilon)
        chi2, n_sigma = mv.chi2, mv.n_sigma
    else:
        chi2 = n_sigma = math.nan
    return FitResult(
        theta=theta,
        cost=float(cost),
        method=label,
        converged=bool(converged),
        n_iterations=int(n_iter),
        chi2=chi2,
        n_sigma=n_sigma,
        predictions=predictions,
        param_names=model.param_names,
        message=message,
    )


def _solve_lsq(cost: CostFunction, theta0, opt):
    return minimize_lm(cost.residuals, cost.residual_jacobian, theta0, opt)


def fit_ols(model: ModelSpec, data: Dataset, config: FitConfig = FitConfig(), theta0=None) -> Solution:
    """OLS stage shared by every method; raises :class:`FitError` on failure."""
    if data.m < model.n_params:
        raise InsufficientData(f"{data.m} datapoints for a {model.n_params}-parameter model")
    start = initial_guess(model, data) if theta0 is None else np.asarray(theta0, float)
    cost = CostFunction("ols", model, data)
    try:
        return _solve_lsq(cost, start, config.optimizer)
    except ShotfitError as exc:
        raise FitError(f"OLS fit failed: {exc}", partial=start) from exc


def _feasible_start(model, data, theta, opt, margin=1e-9):
    """Pull predictions back inside [margin, 1 - margin] by least squares on the excess."""
    x = data.x

    def excess(t):
        f = model.evaluate(x, t)
        return np.maximum(f - (1.0 - margin), 0.0) + np.minimum(f - margin, 0.0)

    def excess_jac(t):
        f = model.evaluate(x, t)
        active = (f > 1.0 - margin) | (f < margin)
        return model.jacobian(x, t) * active[:, None]

    sol = minimize_lm(excess, excess_jac, theta, opt)
    return sol.theta


def _refine(model, data, config, reg, ols_theta):
    opt = config.optimizer
    method = config.method
    if method == "wls":
        predicted = model.evaluate(data.x, ols_theta) if config.bootstrap.startswith("prediction") else None
        est = _bootstrap.estimate(
            config.bootstrap, data, reg.epsilon, predicted=predicted, unsafe_baseline=config.unsafe_baseline
        )
        cost = CostFunction("wls", model, data, reg=reg, weights=est.weights, target=est.p)
        sol = _solve_lsq(cost, ols_theta, opt)
        return sol.theta, sol.cost, sol.converged, sol.n_iter
    if method == "chi2":
        sol = _solve_lsq(CostFunction("chi2", model, data, reg=reg), ols_theta, opt)
        return sol.theta, sol.cost, sol.converged, sol.n_iter
    if method == "irls":
        theta = ols_theta
        weights = irls_weights(model, data, theta, reg)
        total, converged = 0, False
        for _ in range(config.irls_max_outer):
            sol = _solve_lsq(CostFunction("irls", model, data, reg=reg, weights=weights), theta, opt)
            theta, total = sol.theta, total + sol.n_iter
            new_weights = irls_weights(model, data, theta, reg)
            change = np.max(np.abs(new_weights - weights) / weights)
            weights = new_weights
            if change < config.irls_tolerance:
                converged = sol.converged or change == 0
                break
        final = CostFunction("irls", model, data, reg=reg, weights=weights)
        return theta, final(theta), converged, total
    if method == "mle":
        cost = CostFunction("mle", model, data, reg=reg)
        start, n_pre = ols_theta, 0
        if reg.penalty == "hard":
            f = model.evaluate(data.x, start)
            if np.any((f < 0) | (f > 1)):
                soft = CostFunction("mle", model, data, reg=replace(reg, penalty="soft"))
                pre = minimize_scalar(soft, start, opt, soft.gradient, soft.fisher(start))
                start, n_pre = _feasible_start(model, data, pre.theta, opt), pre.n_iter
        sol = minimize_scalar(cost, start, opt, cost.gradient, cost.fisher(start))
        return sol.theta, sol.cost, sol.converged, sol.n_iter + n_pre
    raise ValueError(method)


def fit(
    model: ModelSpec,
    data: Dataset,
    config: FitConfig = FitConfig(),
    theta0=None,
    ols: Solution | None = None,
) -> FitResult:
    """Fit ``model`` to ``data`` with the method selected in ``config``.

    Every method starts with an OLS fit from ``theta0`` (or the model's
    initial guess); non-OLS methods then refine from the OLS estimate. A
    precomputed OLS solution can be passed as ``ols`` to share it between
    methods on the same dataset. If the refinement fails the OLS estimate is
    returned with ``converged=False``.
    """
    reg = config.regularization(data.shots)
    if ols is None:
        ols = fit_ols(model, data, config, theta0)
    if config.method == "ols":
        return _finish(model, data, ols.theta, ols.cost, "ols", ols.converged, ols.n_iter, reg)
    try:
        theta, cost, converged, n_iter = _refine(model, data, config, reg, ols.theta)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteCost("refinement produced non-finite parameters")
    except (ShotfitError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _finish(
            model, data, ols.theta, math.nan, config.label, False, ols.n_iter, reg,
            message=f"{config.label} refinement failed ({exc}); OLS estimate returned",
        )
    message = "" if converged else f"{config.label} refinement stopped before reaching tolerance"
    return _finish(model, data, theta, cost, config.label, converged, n_iter + ols.n_iter, reg, message)
