"""Fitting models to binomially distributed measurement fractions.

Quantum calibration experiments repeat each measurement ``N`` times and
record how often the ``|1>`` state was seen. ``shotfit`` fits parametric
models to those fractions by ordinary, weighted and iteratively reweighted
least squares, by regularized maximum likelihood, or by a chi-squared proxy,
reports the model violation of a fit, and benchmarks the estimators on
simulated data.
"""
from .bootstrap import (
    PointEstimates,
    estimate_baseline,
    estimate_jeffreys,
    estimate_prediction,
    estimate_wilson,
)
from .cost import CostFunction, cost_chi2, cost_mle, cost_ols, cost_wls, irls_weights
from .errors import (
    DegenerateDataWarning,
    DofNonPositive,
    FitError,
    InsufficientData,
    InvalidProbability,
    ParseError,
    ShotfitError,
)
from .models import (
    Dataset,
    ModelSpec,
    exponential_model,
    get_model,
    initial_guess,
    rabi_model,
    register_model,
    sine_model,
)
from .optimizer import FitConfig, FitResult, OptimizerConfig, fit, minimize_lm, minimize_scalar
from .regularization import (
    RegularizationConfig,
    default_epsilon,
    hard_penalty,
    reg_log,
    reg_probability,
    soft_penalty,
)
from .simulate import (
    BenchReport,
    Scenario,
    bundled_scenario,
    cost_landscape,
    penalty_ablation,
    run_scenario,
    sample_dataset,
    simulation_rng,
    variance_estimator_report,
)
from .statistics import EstimatorStats, ModelViolation, estimator_stats, log_likelihood, model_violation

__version__ = "0.1.0"
