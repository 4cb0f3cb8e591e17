"""Command line interface.

Exit codes: 0 ok, 1 model-violation threshold exceeded (``mv`` only),
2 usage error, 3 unreadable input, 4 insufficient data, 5 fit did not
converge (``bench``: every fit failed).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .bootstrap import BOOTSTRAP_KINDS
from .cost import METHODS
from .errors import FitError, InsufficientData, ParseError
from .fileio import (
    MV_SCHEMA,
    bench_payload,
    dumps,
    fit_document,
    format_table,
    read_dataset,
)
from .models import MODEL_NAMES, get_model
from .optimizer import FitConfig, OptimizerConfig, fit
from .regularization import PENALTY_KINDS
from .simulate import (
    LANDSCAPE_KINDS,
    bundled_scenario,
    cost_landscape,
    load_scenario,
    run_scenario,
    variance_estimator_report,
)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INSUFFICIENT = 4
EXIT_NOT_CONVERGED = 5


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _add_fit_options(p, default_method="ols"):
    p.add_argument("dataset", help="dataset file (x,count columns, '# shots=N' header)")
    p.add_argument("--model", choices=MODEL_NAMES, help="model name (default: dataset 'model' hint)")
    p.add_argument("--method", choices=METHODS, default=default_method)
    p.add_argument("--bootstrap", choices=BOOTSTRAP_KINDS, default="jeffreys")
    p.add_argument("--penalty", choices=PENALTY_KINDS, default="soft")
    p.add_argument("--epsilon", type=float, help="regularization strength (default 0.05/shots)")
    p.add_argument("--unsafe-baseline", action="store_true", help="baseline variances without regularization")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-10, help="gradient tolerance")
    p.add_argument("-o", "--output", help="results document path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shotfit", description="Fit models to binomial measurement fractions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to a dataset file")
    _add_fit_options(p)
    p.add_argument("--plot", help="write an SVG of data and fitted curve")

    p = sub.add_parser("mv", help="model violation of a fitted dataset")
    _add_fit_options(p)
    p.add_argument("--threshold", type=float, help="exit with code 1 when n_sigma exceeds this")

    p = sub.add_parser("bench", help="Monte Carlo benchmark of fitting methods")
    p.add_argument("scenario", help="scenario file or bundled name (sine, sine-n1000, exponential, rabi)")
    p.add_argument("--methods", help="comma separated method labels, e.g. ols,wls:jeffreys,mle:soft")
    p.add_argument("--n-sims", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-estimates", action="store_true", help="omit per-simulation estimates from the report")
    p.add_argument("-o", "--output", help="report path (default: no report file)")
    p.add_argument("--plot-dir", help="directory for histogram and scatter SVGs")

    p = sub.add_parser("landscape", help="cost along one parameter axis")
    p.add_argument("dataset")
    p.add_argument("--model", choices=MODEL_NAMES)
    p.add_argument("--cost", choices=LANDSCAPE_KINDS, default="ols")
    p.add_argument("--theta", type=float, nargs="+", help="centre point (default: OLS fit)")
    p.add_argument("--axis", required=True, help="parameter name or index")
    p.add_argument("--range", type=float, nargs=3, metavar=("LO", "HI", "N"), required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("-o", "--output", help="CSV table path (default stdout)")
    p.add_argument("--plot")

    p = sub.add_parser("variance-report", help="variance estimates versus measured fraction")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("-o", "--output", help="CSV table path (default stdout)")
    p.add_argument("--plot")
    return parser


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load(args):
    data, meta = read_dataset(args.dataset)
    name = args.model or meta.get("model")
    if name is None:
        raise _Fail(EXIT_USAGE, "no --model given and the dataset has no model hint")
    try:
        model = get_model(name)
    except KeyError as exc:
        raise _Fail(EXIT_USAGE, str(exc.args[0])) from None
    return data, model


def _config(args):
    return FitConfig(
        method=args.method,
        bootstrap=args.bootstrap,
        penalty=args.penalty,
        epsilon=args.epsilon,
        unsafe_baseline=args.unsafe_baseline,
        optimizer=OptimizerConfig(max_iterations=args.max_iter, gradient_tolerance=args.tol),
    )


def _run_fit(args):
    data, model = _load(args)
    config = _config(args)
    try:
        result = fit(model, data, config)
    except InsufficientData as exc:
        raise _Fail(EXIT_INSUFFICIENT, str(exc)) from None
    except FitError as exc:
        raise _Fail(EXIT_NOT_CONVERGED, str(exc)) from None
    return data, model, config, result


def cmd_fit(args) -> int:
    data, model, config, result = _run_fit(args)
    _write(args.output, dumps(fit_document(model, data, result, config)))
    if args.plot:
        from .plotting import plot_fit

        plot_fit(args.plot, model, data, result)
    if not result.converged:
        print(f"shotfit: {config.label} fit did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_mv(args) -> int:
    data, model, config, result = _run_fit(args)
    dof = data.m - model.n_params
    if dof < 1:
        raise _Fail(EXIT_INSUFFICIENT, f"{data.m} datapoints leave no degrees of freedom")
    exceeded = None if args.threshold is None else bool(result.n_sigma > args.threshold)
    doc = {
        "schema": MV_SCHEMA,
        "model": model.name,
        "method": result.method,
        "chi2": result.chi2,
        "dof": dof,
        "n_sigma": result.n_sigma,
        "theta": result.theta,
        "converged": result.converged,
        "threshold": args.threshold,
        "exceeded": exceeded,
    }
    if args.output:
        _write(args.output, dumps(doc))
    print(f"chi2={result.chi2!r} dof={dof} n_sigma={result.n_sigma!r}")
    if exceeded:
        print(f"shotfit: n_sigma {result.n_sigma:.3f} exceeds threshold {args.threshold}", file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


def _scenario(args):
    if os.path.exists(args.scenario):
        try:
            scenario = load_scenario(args.scenario)
        except (ValueError, KeyError, TypeError) as exc:
            raise _Fail(EXIT_PARSE, f"invalid scenario {args.scenario}: {exc}") from None
    else:
        try:
            scenario = bundled_scenario(args.scenario)
        except FileNotFoundError as exc:
            raise _Fail(EXIT_PARSE, str(exc)) from None
    changes = {}
    if args.methods:
        changes["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if args.n_sims is not None:
        changes["n_simulations"] = args.n_sims
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.shots is not None:
        changes["shots"] = args.shots
    try:
        return replace(scenario, **changes)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None


def cmd_bench(args) -> int:
    scenario = _scenario(args)
    report = run_scenario(scenario, workers=args.workers)
    print(format_table(report))
    failed = [row.n_failed for row in report.methods]
    if any(failed):
        print(f"shotfit: failed fits per method: {dict(zip(report.labels, failed))}", file=sys.stderr)
    if args.output:
        _write(args.output, dumps(bench_payload(report, include_estimates=not args.no_estimates)))
    if args.plot_dir:
        from .plotting import plot_histograms, plot_scatter

        os.makedirs(args.plot_dir, exist_ok=True)
        for name in scenario.model_spec.param_names:
            plot_histograms(os.path.join(args.plot_dir, f"hist_{name}.svg"), report, name)
        for a, b in scenario.scatter_pairs:
            for label in report.labels:
                xs, ys = report.scatter(label, (a, b))
                safe = label.replace(":", "_").replace("+", "_").replace("!", "")
                plot_scatter(os.path.join(args.plot_dir, f"scatter_{safe}_{a}_{b}.svg"), xs, ys, a, b)
    if all(n == scenario.n_simulations for n in failed):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _table_csv(table: dict) -> str:
    keys = list(table)
    out = [",".join(keys)]
    for row in zip(*(table[k] for k in keys)):
        out.append(",".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def cmd_landscape(args) -> int:
    data, model = _load(args)
    if args.theta is None:
        theta = fit(model, data).theta
    else:
        theta = np.array(args.theta)
        if theta.size != model.n_params:
            raise _Fail(EXIT_USAGE, f"--theta needs {model.n_params} values")
    axis = int(args.axis) if args.axis.isdigit() else None
    if axis is None:
        if args.axis not in model.param_names:
            raise _Fail(EXIT_USAGE, f"unknown parameter {args.axis!r}; choose from {model.param_names}")
        axis = model.param_names.index(args.axis)
    lo, hi, n = args.range
    table = cost_landscape(model, data, args.cost, theta, axis, np.linspace(lo, hi, int(n)), args.epsilon)
    _write(args.output, _table_csv(table))
    if args.plot:
        from .plotting import plot_landscape

        plot_landscape(args.plot, {args.cost: table}, xlabel=model.param_names[axis])
    return EXIT_OK


def cmd_variance_report(args) -> int:
    if args.shots < 1:
        raise _Fail(EXIT_USAGE, "--shots must be >= 1")
    table = variance_estimator_report(args.shots, args.points)
    _write(args.output, _table_csv(table))
    if args.plot:
        from .plotting import plot_variance_report

        plot_variance_report(args.plot, table, args.shots)
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "mv": cmd_mv,
    "bench": cmd_bench,
    "landscape": cmd_landscape,
    "variance-report": cmd_variance_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        print(f"shotfit: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"shotfit: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InsufficientData as exc:
        print(f"shotfit: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT


if __name__ == "__main__":
    sys.exit(main())
