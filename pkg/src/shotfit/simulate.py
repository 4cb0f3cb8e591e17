"""Synthetic binomial data and Monte Carlo benchmarks of the fitting methods.

Every simulation ``s`` of a scenario draws its counts from its own Philox
stream keyed by ``(seed, s)``. A simulation therefore produces the same
dataset whether it runs alone, in a chunk, or in a worker process, and all
methods of a scenario are fitted to the same per-simulation dataset.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .cost import CostFunction
from .errors import InvalidProbability, ShotfitError
from .models import Dataset, ModelSpec, get_model
from .optimizer import FitConfig, fit, fit_ols
from .regularization import RegularizationConfig, default_epsilon
from .statistics import EstimatorStats, estimator_stats, log_likelihood
from .bootstrap import variance_from_fraction

__all__ = [
    "Scenario",
    "MethodReport",
    "BenchReport",
    "simulation_rng",
    "sample_dataset",
    "run_scenario",
    "penalty_ablation",
    "cost_landscape",
    "variance_estimator_report",
    "load_scenario",
    "bundled_scenario",
    "dataset_digest",
]

SCENARIO_SCHEMA = "shotfit.scenario/1"
BENCH_SCHEMA = "shotfit.bench/1"


def simulation_rng(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream for simulation ``index`` of a seeded ensemble."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_dataset(model: ModelSpec, theta, x, shots: int, rng: np.random.Generator) -> Dataset:
    """Draw ``counts_j ~ Binomial(shots, F(x_j, theta))``."""
    x = np.asarray(x, dtype=float)
    p = model.evaluate(x, np.asarray(theta, dtype=float))
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise InvalidProbability(
            f"model values must lie in [0, 1], got range [{np.min(p)}, {np.max(p)}]"
        )
    return Dataset(x, rng.binomial(shots, p), shots)


def dataset_digest(data: Dataset) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update(np.ascontiguousarray(data.x).tobytes())
    h.update(np.ascontiguousarray(data.counts).tobytes())
    h.update(str(data.shots).encode())
    return h.hexdigest()


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo configuration: ground truth, design and methods.

    ``x_grid`` is either ``(count, start, stop)`` for a linearly spaced grid
    or an explicit sequence of values (``explicit_x``).
    """

    model: str
    theta: tuple
    x_grid: tuple = (23, 0.0, 4.0)
    shots: int = 60
    n_simulations: int = 4000
    methods: tuple = ("ols",)
    seed: int = 0
    name: str = ""
    epsilon: float | None = None
    explicit_x: tuple | None = None
    scatter_pairs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "x_grid", tuple(self.x_grid))
        object.__setattr__(self, "scatter_pairs", tuple(tuple(p) for p in self.scatter_pairs))
        if self.explicit_x is not None:
            object.__setattr__(self, "explicit_x", tuple(float(v) for v in self.explicit_x))
        if self.shots < 1 or self.n_simulations < 1:
            raise ValueError("shots and n_simulations must be positive")
        spec = self.model_spec
        if len(self.theta) != spec.n_params:
            raise ValueError(f"{self.model} takes {spec.n_params} parameters, got {len(self.theta)}")
        for label in self.methods:
            FitConfig.from_label(label)
        p = spec.evaluate(self.x, np.array(self.theta))
        if not np.all((p >= 0.0) & (p <= 1.0)):
            raise InvalidProbability("ground-truth predictions leave [0, 1] on the grid")

    @property
    def model_spec(self) -> ModelSpec:
        return get_model(self.model)

    @property
    def x(self) -> np.ndarray:
        if self.explicit_x is not None:
            return np.array(self.explicit_x)
        count, start, stop = self.x_grid
        return np.linspace(float(start), float(stop), int(count))

    def fit_configs(self) -> list[FitConfig]:
        return [FitConfig.from_label(label, epsilon=self.epsilon) for label in self.methods]

    def to_dict(self) -> dict:
        d = {
            "schema": SCENARIO_SCHEMA,
            "name": self.name,
            "model": self.model,
            "theta": list(self.theta),
            "shots": self.shots,
            "n_simulations": self.n_simulations,
            "methods": list(self.methods),
            "seed": self.seed,
            "epsilon": self.epsilon,
            "scatter_pairs": [list(p) for p in self.scatter_pairs],
        }
        if self.explicit_x is not None:
            d["x"] = {"values": list(self.explicit_x)}
        else:
            count, start, stop = self.x_grid
            d["x"] = {"count": int(count), "start": float(start), "stop": float(stop)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        schema = d.get("schema", SCENARIO_SCHEMA)
        if schema != SCENARIO_SCHEMA:
            raise ValueError(f"unsupported scenario schema {schema!r}")
        x = d.get("x", {"count": 23, "start": 0.0, "stop": 4.0})
        kwargs = {}
        if "values" in x:
            kwargs["explicit_x"] = x["values"]
        else:
            kwargs["x_grid"] = (int(x["count"]), float(x["start"]), float(x["stop"]))
        return cls(
            model=d["model"],
            theta=d["theta"],
            shots=int(d.get("shots", 60)),
            n_simulations=int(d.get("n_simulations", 4000)),
            methods=d.get("methods", ["ols"]),
            seed=int(d.get("seed", 0)),
            name=d.get("name", ""),
            epsilon=d.get("epsilon"),
            scatter_pairs=d.get("scatter_pairs", ()),
            **kwargs,
        )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return Scenario.from_dict(json.load(fh))


def bundled_scenario(name: str) -> Scenario:
    """Scenario shipped with the package (``sine``, ``sine-n1000``, ``exponential``, ``rabi``)."""
    ref = resources.files("shotfit") / "scenarios" / f"{name}.json"
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return Scenario.from_dict(json.loads(ref.read_text()))


@dataclass(eq=False)
class MethodReport:
    """Results of one method over the ensemble.

    ``estimates`` has one row per simulation index (NaN where the fit
    failed); ``stats`` is computed from the finite rows only.
    """

    label: str
    stats: EstimatorStats
    convergence_rate: float
    n_failed: int
    estimates: np.ndarray = field(repr=False, default=None)
    converged: np.ndarray = field(repr=False, default=None)
    digests: list = field(repr=False, default_factory=list)


@dataclass(eq=False)
class BenchReport:
    scenario: Scenario
    methods: list
    created: float = field(default_factory=time.time)

    def __getitem__(self, label: str) -> MethodReport:
        for row in self.methods:
            if row.label == label:
                return row
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [row.label for row in self.methods]

    def column(self, label: str, param: str) -> np.ndarray:
        names = self.scenario.model_spec.param_names
        return self[label].estimates[:, names.index(param)]

    def scatter(self, label: str, pair) -> tuple[np.ndarray, np.ndarray]:
        """Estimates of two parameters of one method, paired per simulation."""
        return self.column(label, pair[0]), self.column(label, pair[1])

    def paired(self, param: str, label_a: str, label_b: str) -> tuple[np.ndarray, np.ndarray]:
        """One parameter estimated by two methods on the same datasets."""
        return self.column(label_a, param), self.column(label_b, param)

    def payload(self) -> dict:
        """Machine-readable content, without the creation timestamp."""
        from .fileio import bench_payload

        return bench_payload(self)


def _simulate_chunk(scenario: Scenario, indices) -> list:
    model = scenario.model_spec
    configs = scenario.fit_configs()
    theta = np.array(scenario.theta)
    x = scenario.x
    n = model.n_params
    out = []
    for s in indices:
        data = sample_dataset(model, theta, x, scenario.shots, simulation_rng(scenario.seed, s))
        digest = dataset_digest(data)
        eps = default_epsilon(data.shots) if scenario.epsilon is None else scenario.epsilon
        try:
            ols = fit_ols(model, data, configs[0] if configs else FitConfig())
        except ShotfitError:
            ols = None
        rows = []
        for config in configs:
            if ols is None:
                rows.append((np.full(n, np.nan), False, math.nan, digest))
                continue
            res = fit(model, data, config, ols=ols)
            ll = log_likelihood(data, res.predictions, eps)
            rows.append((res.theta, res.converged, ll, digest))
        out.append(rows)
    return out


def _chunks(n, k):
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_scenario(scenario: Scenario, workers: int = 1, n_chunks: int | None = None) -> BenchReport:
    """Fit every method of ``scenario`` to ``n_simulations`` simulated datasets.

    With ``workers > 1`` simulations are split over a process pool; the
    report is identical to a sequential run. Failed fits count against the
    convergence rate and are left out of the statistics.
    """
    n_sims = scenario.n_simulations
    if workers > 1:
        chunks = _chunks(n_sims, n_chunks or 4 * workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, [scenario] * len(chunks), chunks))
        per_sim = [rows for part in parts for rows in part]
    else:
        per_sim = _simulate_chunk(scenario, range(n_sims))
    theta = np.array(scenario.theta)
    reports = []
    for i, label in enumerate(scenario.methods):
        est = np.array([rows[i][0] for rows in per_sim])
        conv = np.array([rows[i][1] for rows in per_sim])
        ll = np.array([rows[i][2] for rows in per_sim])
        digests = [rows[i][3] for rows in per_sim]
        ok = np.all(np.isfinite(est), axis=1)
        stats = estimator_stats(est[ok], theta, ll[ok]) if ok.any() else estimator_stats(
            np.full((1, theta.size), np.nan), theta
        )
        reports.append(
            MethodReport(label, stats, float(np.mean(conv)), int(np.sum(~ok)), est, conv, digests)
        )
    return BenchReport(scenario, reports)


ABLATION_METHODS = ("ols", "mle:none", "mle:soft", "mle:hard")


def penalty_ablation(scenario: Scenario, workers: int = 1) -> BenchReport:
    """Compare MLE without penalty, with soft and with hard penalty against OLS."""
    return run_scenario(replace(scenario, methods=ABLATION_METHODS), workers=workers)


LANDSCAPE_KINDS = ("ols", "mle", "mle_clip", "chi2")


def _mle_clip_cost(model, data, theta, epsilon):
    f = np.clip(model.evaluate(data.x, theta), epsilon, 1.0 - epsilon)
    y = data.y
    return float(-data.shots * np.sum(y * np.log(f) + (1.0 - y) * np.log(1.0 - f)))


def cost_landscape(
    model: ModelSpec,
    data: Dataset,
    cost_kind: str,
    theta_center,
    axis: int,
    values,
    epsilon: float | None = None,
) -> dict[str, np.ndarray]:
    """Cost along one parameter axis, all other parameters held at ``theta_center``.

    ``cost_kind`` is one of ``ols``, ``mle`` (regularized log, no penalty),
    ``mle_clip`` (predictions clipped to ``[eps, 1-eps]`` then plain log) or
    ``chi2``. Returns ``{"value": ..., "cost": ...}``.
    """
    theta_center = np.asarray(theta_center, dtype=float)
    if not 0 <= axis < model.n_params:
        raise ValueError(f"axis {axis} out of range for {model.n_params} parameters")
    if cost_kind not in LANDSCAPE_KINDS:
        raise ValueError(f"unknown cost kind {cost_kind!r}; choose from {LANDSCAPE_KINDS}")
    eps = default_epsilon(data.shots) if epsilon is None else epsilon
    values = np.asarray(values, dtype=float)
    if cost_kind == "mle_clip":
        fn = lambda t: _mle_clip_cost(model, data, t, eps)
    else:
        reg = RegularizationConfig(eps, penalty="none")
        fn = CostFunction(cost_kind, model, data, reg=reg)
    costs = np.empty_like(values)
    for i, v in enumerate(values):
        theta = theta_center.copy()
        theta[axis] = v
        costs[i] = fn(theta)
    return {"value": values, "cost": costs}


def variance_estimator_report(shots: int, n_points: int = 101) -> dict[str, np.ndarray]:
    """Variance of a measured fraction under each bootstrap scheme, on a grid over [0, 1]."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    y = np.linspace(0.0, 1.0, n_points)
    return {"y": y, **variance_from_fraction(y, shots)}
