"""Parametric model families and the measured dataset container.

Each model maps an array of independent values ``x`` and a parameter vector
``theta`` to predicted probabilities. Parameter order is fixed per model:

========================  ===========================================
model                     parameters
========================  ===========================================
``sine``                  amplitude, frequency, phase, offset
``exponential``           offset, scale, gamma
``rabi``                  A, B, omega, omega0   (rotation angle t = pi)
``rabi_free_angle``       A, B, omega, omega0, t
========================  ===========================================
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateDataWarning, InsufficientData, LengthMismatch

__all__ = [
    "Dataset",
    "ModelSpec",
    "sine_model",
    "exponential_model",
    "rabi_model",
    "get_model",
    "register_model",
    "initial_guess",
    "MODEL_NAMES",
]

TWO_PI = 2.0 * np.pi
# half width at half maximum of the t = pi Rabi line, in units of omega
_RABI_HWHM = 0.7986853552847011


@dataclass(frozen=True, eq=False)
class Dataset:
    """Counts of the ``|1>`` outcome measured at each independent value.

    Parameters
    ----------
    x : array_like
        Independent variable, length ``m >= 1``.
    counts : array_like of int
        Number of ``|1>`` outcomes per point, each in ``[0, shots]``.
    shots : int
        Repetitions per point.
    """

    x: np.ndarray
    counts: np.ndarray
    shots: int

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        counts = np.asarray(self.counts)
        if counts.dtype.kind == "f":
            if not np.all(np.isfinite(counts)) or np.any(counts != np.round(counts)):
                raise ValueError("counts must be integers")
        counts = np.array(counts, dtype=np.int64).reshape(-1)
        shots = int(self.shots)
        if shots < 1:
            raise ValueError(f"shots must be positive, got {shots}")
        if x.size < 1:
            raise ValueError("dataset needs at least one point")
        if x.size != counts.size:
            raise LengthMismatch(f"x has {x.size} entries, counts has {counts.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("x values must be finite")
        if np.any(counts < 0) or np.any(counts > shots):
            raise ValueError(f"counts must lie in [0, {shots}]")
        x.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "shots", shots)

    @property
    def y(self) -> np.ndarray:
        """Measured fractions ``counts / shots``."""
        return self.counts / self.shots

    @property
    def m(self) -> int:
        return self.x.size

    def __len__(self):
        return self.x.size

    def take(self, index) -> "Dataset":
        """Dataset restricted to (or reordered by) ``index``."""
        return Dataset(self.x[index], self.counts[index], self.shots)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A model ``F(x, theta)`` with analytic Jacobian and a data-driven guess.

    ``evaluate`` and ``jacobian`` are vectorized over ``x``; the Jacobian has
    shape ``(len(x), n_params)``. ``canonical`` maps a parameter vector onto a
    unique representative of its equivalence class (e.g. positive sine
    amplitude) and defaults to the identity.
    """

    name: str
    param_names: tuple[str, ...]
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray]
    guess: Callable[["Dataset"], np.ndarray]
    canonical: Callable[[np.ndarray], np.ndarray] = field(default=lambda theta: theta)

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def __call__(self, x, theta):
        return self.evaluate(np.asarray(x, dtype=float), np.asarray(theta, dtype=float))


# ---------------------------------------------------------------- sine


def _sine_eval(x, theta):
    amplitude, frequency, phase, offset = theta
    return amplitude * np.sin(TWO_PI * frequency * x + phase) + offset


def _sine_jac(x, theta):
    amplitude, frequency, phase, _ = theta
    arg = TWO_PI * frequency * x + phase
    s, c = np.sin(arg), np.cos(arg)
    jac = np.empty((np.size(x), 4))
    jac[:, 0] = s
    jac[:, 1] = amplitude * c * TWO_PI * x
    jac[:, 2] = amplitude * c
    jac[:, 3] = 1.0
    return jac


def _sine_canonical(theta):
    theta = np.array(theta, dtype=float)
    if theta[1] < 0:
        theta[0], theta[1], theta[2] = -theta[0], -theta[1], -theta[2]
    if theta[0] < 0:
        theta[0] = -theta[0]
        theta[2] += np.pi
    theta[2] = np.pi - np.mod(np.pi - theta[2], TWO_PI)
    return theta


def _dominant_frequency(x, y, oversample=16):
    """Frequency of the largest nonzero bin of a zero-padded DFT of ``y - mean``.

    Non-uniform grids are resampled linearly onto a uniform grid first.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    span = xs[-1] - xs[0]
    m = xs.size
    if m < 3 or span <= 0:
        return 0.0
    grid = np.linspace(xs[0], xs[-1], m)
    yu = np.interp(grid, xs, ys) - np.mean(ys)
    dx = span / (m - 1)
    n_fft = oversample * m
    power = np.abs(np.fft.rfft(yu, n=n_fft))
    freqs = np.fft.rfftfreq(n_fft, d=dx)
    # skip the zero-frequency lobe
    start = max(1, oversample // 2)
    k = start + int(np.argmax(power[start:]))
    return float(freqs[k])


def _sine_guess(data):
    x, y = data.x, data.y
    offset = float(np.mean(y))
    centered = y - offset
    amplitude = float(np.sqrt(2.0) * np.sqrt(np.mean(centered**2)))
    frequency = _dominant_frequency(x, y)
    # phase from projecting the centered data on sin/cos at the guessed frequency
    arg = TWO_PI * frequency * x
    basis = np.column_stack([np.sin(arg), np.cos(arg)])
    (a, b), *_ = np.linalg.lstsq(basis, centered, rcond=None)
    phase = float(np.arctan2(b, a)) if (a or b) else 0.0
    return np.array([amplitude, frequency, phase, offset])


def sine_model() -> ModelSpec:
    """``A sin(2 pi f x + phi) + offset`` with parameters (A, f, phi, offset)."""
    return ModelSpec(
        name="sine",
        param_names=("amplitude", "frequency", "phase", "offset"),
        evaluate=_sine_eval,
        jacobian=_sine_jac,
        guess=_sine_guess,
        canonical=_sine_canonical,
    )


# --------------------------------------------------------- exponential


def _exp_eval(x, theta):
    offset, scale, gamma = theta
    return offset + scale * np.exp(-gamma * x)


def _exp_jac(x, theta):
    _, scale, gamma = theta
    e = np.exp(-gamma * x)
    jac = np.empty((np.size(x), 3))
    jac[:, 0] = 1.0
    jac[:, 1] = e
    jac[:, 2] = -scale * x * e
    return jac


def _exp_guess(data):
    order = np.argsort(data.x, kind="stable")
    x, y = data.x[order], data.y[order]
    n_tail = max(1, x.size // 5)
    offset = float(np.mean(y[-n_tail:]))
    scale = float(y[0] - offset)
    gamma = 1.0 / max(x[-1] - x[0], np.finfo(float).tiny)
    dev = np.abs(y - offset)
    # only points clearly above the tail contribute to the log-linear fit
    use = dev > 0.1 * abs(scale)
    if np.count_nonzero(use) >= 2 and np.ptp(x[use]) > 0:
        slope, _ = np.polyfit(x[use], np.log(dev[use]), 1)
        if slope < 0:
            gamma = float(-slope)
    return np.array([offset, scale, gamma])


def exponential_model() -> ModelSpec:
    """``offset + scale * exp(-gamma x)`` with parameters (offset, scale, gamma)."""
    return ModelSpec(
        name="exponential",
        param_names=("offset", "scale", "gamma"),
        evaluate=_exp_eval,
        jacobian=_exp_jac,
        guess=_exp_guess,
    )


# ---------------------------------------------------------------- rabi


def _rabi_parts(x, A, B, omega, omega0, t):
    detuning = x - omega0
    w2 = omega**2 + detuning**2
    w = np.sqrt(w2)
    with np.errstate(invalid="ignore", divide="ignore"):
        lorentz = np.where(w2 > 0, omega**2 / np.where(w2 > 0, w2, 1.0), 1.0)
    return detuning, w2, w, lorentz


def _rabi_eval_t(x, A, B, omega, omega0, t):
    _, _, w, lorentz = _rabi_parts(x, A, B, omega, omega0, t)
    return A + B * lorentz * np.sin(w * t / 2.0) ** 2


def _rabi_jac_t(x, A, B, omega, omega0, t):
    detuning, w2, w, lorentz = _rabi_parts(x, A, B, omega, omega0, t)
    half = w * t / 2.0
    s2 = np.sin(half) ** 2
    ds_dw = np.sin(2.0 * half) * t / 2.0  # d sin^2(w t/2) / dw
    safe_w = np.where(w > 0, w, 1.0)
    safe_w2 = np.where(w2 > 0, w2, 1.0)
    dg_domega = np.where(w2 > 0, 2.0 * omega * detuning**2 / safe_w2**2, 0.0)
    dg_domega0 = np.where(w2 > 0, 2.0 * omega**2 * detuning / safe_w2**2, 0.0)
    dw_domega = np.where(w > 0, omega / safe_w, 1.0)
    dw_domega0 = np.where(w > 0, -detuning / safe_w, 0.0)
    jac = np.empty((np.size(x), 5))
    jac[:, 0] = 1.0
    jac[:, 1] = lorentz * s2
    jac[:, 2] = B * (dg_domega * s2 + lorentz * ds_dw * dw_domega)
    jac[:, 3] = B * (dg_domega0 * s2 + lorentz * ds_dw * dw_domega0)
    jac[:, 4] = B * lorentz * np.sin(2.0 * half) * w / 2.0
    return jac


def _rabi_guess_fixed(data, t=np.pi):
    order = np.argsort(data.x, kind="stable")
    x, y = data.x[order], data.y[order]
    baseline = float(np.median(y))
    up, down = y.max() - baseline, baseline - y.min()
    peak = int(np.argmax(y)) if up >= down else int(np.argmin(y))
    omega0 = float(x[peak])
    height = float(y[peak] - baseline)
    half = baseline + height / 2.0
    above = (y - half) * np.sign(height) > 0 if height else np.zeros_like(y, bool)
    widths = []
    # walk out of the peak on each side to the half-maximum crossing
    for step in (-1, 1):
        i = peak
        while 0 <= i + step < x.size and above[i + step]:
            i += step
        j = i + step
        if 0 <= j < x.size:
            y0, y1 = y[i] - half, y[j] - half
            frac = y0 / (y0 - y1) if y0 != y1 else 0.5
            widths.append(abs(x[i] + frac * (x[j] - x[i]) - omega0))
    if widths:
        hwhm = float(np.mean(widths))
    else:
        hwhm = float(np.ptp(x)) / 4.0 if x.size > 1 else 1.0
    omega = max(hwhm, 1e-12) / _RABI_HWHM * (np.pi / t)
    amp = np.sin(omega * t / 2.0) ** 2
    B = height / amp if amp > 0.1 else height
    return np.array([baseline, B, omega, omega0])


def rabi_model(free_angle: bool = False, angle: float = np.pi) -> ModelSpec:
    """Rabi spectroscopy lineshape.

    ``A + B W^-2 omega^2 sin^2(W t / 2)`` with ``W^2 = omega^2 + (x - omega0)^2``.
    By default the rotation angle ``t`` is held at ``angle``; with
    ``free_angle=True`` it becomes a fifth fitted parameter.
    """
    if free_angle:
        return ModelSpec(
            name="rabi_free_angle",
            param_names=("A", "B", "omega", "omega0", "t"),
            evaluate=lambda x, th: _rabi_eval_t(x, *th),
            jacobian=lambda x, th: _rabi_jac_t(x, *th),
            guess=lambda data: np.append(_rabi_guess_fixed(data, angle), angle),
        )
    return ModelSpec(
        name="rabi",
        param_names=("A", "B", "omega", "omega0"),
        evaluate=lambda x, th: _rabi_eval_t(x, *th, angle),
        jacobian=lambda x, th: _rabi_jac_t(x, *th, angle)[:, :4],
        guess=lambda data: _rabi_guess_fixed(data, angle),
    )


# ------------------------------------------------------------ registry

_REGISTRY: dict[str, Callable[[], ModelSpec]] = {
    "sine": sine_model,
    "exponential": exponential_model,
    "rabi": rabi_model,
    "rabi_free_angle": lambda: rabi_model(free_angle=True),
}
MODEL_NAMES = tuple(_REGISTRY)


def register_model(name: str, factory: Callable[[], ModelSpec]) -> None:
    """Make a programmatically built model available by name."""
    _REGISTRY[name] = factory


def get_model(name: str) -> ModelSpec:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(_REGISTRY)}") from None


def initial_guess(model: ModelSpec, data: Dataset) -> np.ndarray:
    """Heuristic starting point for a local fit of ``model`` to ``data``.

    Emits :class:`DegenerateDataWarning` when all fractions are equal; the
    returned guess then has zero amplitude (sine) or zero scale (exponential).
    """
    if data.m < model.n_params:
        raise InsufficientData(
            f"{data.m} datapoints for a {model.n_params}-parameter model"
        )
    y = data.y
    if np.all(y == y[0]):
        warnings.warn("all measured fractions are equal", DegenerateDataWarning, stacklevel=2)
        guess = np.array(model.guess(data), dtype=float)
        guess = np.where(np.isfinite(guess), guess, 0.0)
        if model.name == "sine":
            guess[0], guess[3] = 0.0, y[0]
        elif model.name == "exponential":
            guess[0], guess[1] = y[0], 0.0
        return guess
    guess = np.array(model.guess(data), dtype=float)
    if guess.shape != (model.n_params,):
        raise ValueError(f"guess for {model.name} has shape {guess.shape}")
    return np.where(np.isfinite(guess), guess, 0.0)
