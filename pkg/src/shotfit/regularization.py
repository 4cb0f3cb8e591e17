"""Regularized probability, regularized logarithm and out-of-range penalties.

All functions accept scalars or arrays and are total: every real input gives
a finite output (the hard penalty returns its configured ``L`` outside
``[0, 1]``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "RegularizationConfig",
    "reg_probability",
    "reg_probability_derivative",
    "reg_log",
    "reg_log_derivative",
    "soft_penalty",
    "soft_penalty_derivative",
    "hard_penalty",
    "default_epsilon",
    "PENALTY_KINDS",
]

PenaltyKind = Literal["none", "soft", "hard"]
PENALTY_KINDS = ("none", "soft", "hard")
DEFAULT_HARD_PENALTY = 1e100


@dataclass(frozen=True)
class RegularizationConfig:
    """Regularization strength and the MLE penalty for predictions outside [0, 1]."""

    epsilon: float
    penalty: PenaltyKind = "soft"
    hard_penalty_value: float = DEFAULT_HARD_PENALTY

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.penalty not in PENALTY_KINDS:
            raise ValueError(f"penalty must be one of {PENALTY_KINDS}, got {self.penalty!r}")
        if not self.hard_penalty_value > 0:
            raise ValueError("hard penalty value must be positive")

    @classmethod
    def for_shots(cls, shots: int, **kwargs) -> "RegularizationConfig":
        return cls(epsilon=default_epsilon(shots), **kwargs)

    def penalty_terms(self, p):
        """Per-prediction penalty values."""
        if self.penalty == "soft":
            return soft_penalty(p, self.epsilon)
        if self.penalty == "hard":
            return hard_penalty(p, self.hard_penalty_value)
        return np.zeros_like(np.asarray(p, dtype=float))


def default_epsilon(shots: int) -> float:
    """Regularization strength ``0.05 / shots``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    return 0.05 / shots


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def reg_probability(p, epsilon):
    """Map any real ``p`` into ``[epsilon/2, 1 - epsilon/2]``.

    Identity on ``[epsilon, 1 - epsilon]``, quadratic blends on the two
    ``epsilon``-wide edge bands and constant outside ``[0, 1]``; the result is
    continuously differentiable.
    """
    q = np.asarray(p, dtype=float)
    half = epsilon / 2.0
    low = half + np.square(q) / (2.0 * epsilon)
    high = 1.0 - (half + np.square(1.0 - q) / (2.0 * epsilon))
    out = np.select(
        [q < 0, q < epsilon, q <= 1.0 - epsilon, q <= 1.0],
        [half, low, q, high],
        default=1.0 - half,
    )
    # NaN passes through the default branch otherwise
    out = np.where(np.isnan(q), np.nan, out)
    return _out(out, p)


def reg_probability_derivative(p, epsilon):
    q = np.asarray(p, dtype=float)
    out = np.select(
        [q < 0, q < epsilon, q <= 1.0 - epsilon, q <= 1.0],
        [0.0, q / epsilon, 1.0, (1.0 - q) / epsilon],
        default=0.0,
    )
    return _out(out, p)


def reg_log(x, epsilon):
    """Logarithm continued below ``epsilon`` by its second-order Taylor expansion."""
    q = np.asarray(x, dtype=float)
    d = q - epsilon
    taylor = np.log(epsilon) + d / epsilon - np.square(d) / (2.0 * epsilon**2)
    out = np.where(q > epsilon, np.log(np.maximum(q, epsilon)), taylor)
    return _out(out, x)


def reg_log_derivative(x, epsilon):
    q = np.asarray(x, dtype=float)
    out = np.where(q > epsilon, 1.0 / np.maximum(q, epsilon), 1.0 / epsilon - (q - epsilon) / epsilon**2)
    return _out(out, x)


def soft_penalty(p, epsilon):
    """``(max(p, 1) - 1 + min(p, 0))**2 / epsilon**3``; zero on [0, 1]."""
    q = np.asarray(p, dtype=float)
    excess = np.maximum(q, 1.0) - 1.0 + np.minimum(q, 0.0)
    return _out(np.square(excess) / epsilon**3, p)


def soft_penalty_derivative(p, epsilon):
    q = np.asarray(p, dtype=float)
    excess = np.maximum(q, 1.0) - 1.0 + np.minimum(q, 0.0)
    return _out(2.0 * excess / epsilon**3, p)


def hard_penalty(p, L=DEFAULT_HARD_PENALTY):
    """0 for ``p`` in the closed interval [0, 1], ``L`` otherwise."""
    q = np.asarray(p, dtype=float)
    return _out(np.where((q >= 0.0) & (q <= 1.0), 0.0, float(L)), p)
