"""Dataset files, results documents and their schemas.

Dataset file (``shotfit.dataset/1``), comma separated::

    # shotfit dataset v1
    # shots=60
    # model=sine
    x,count
    0.0,41
    0.1818181818181818,52

Metadata lines are ``# key=value``; ``shots`` is required unless a ``shots``
column is present, in which case it must be constant. Results and bench
reports are JSON documents carrying a ``schema`` field; floats are written
with ``repr`` precision and non-finite values as ``null``.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import ParseError
from .models import Dataset

__all__ = [
    "DATASET_SCHEMA",
    "FIT_SCHEMA",
    "FIT_RESULT_JSON_SCHEMA",
    "BENCH_JSON_SCHEMA",
    "read_dataset",
    "parse_dataset",
    "format_dataset",
    "write_dataset",
    "fit_document",
    "dumps",
    "loads",
    "bench_payload",
    "format_table",
]

DATASET_SCHEMA = "shotfit.dataset/1"
FIT_SCHEMA = "shotfit.fit/1"
MV_SCHEMA = "shotfit.mv/1"
BENCH_SCHEMA = "shotfit.bench/1"


def parse_dataset(text: str) -> tuple[Dataset, dict]:
    """Parse dataset text into a :class:`Dataset` and its metadata dict."""
    meta: dict[str, str] = {}
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        rows.append(line)
    if not rows:
        raise ParseError("dataset has no header or rows")
    reader = csv.reader(rows)
    header = [h.strip().lower() for h in next(reader)]
    if "x" not in header or "count" not in header:
        raise ParseError(f"header must contain 'x' and 'count', got {header}")
    ix, ic = header.index("x"), header.index("count")
    ishots = header.index("shots") if "shots" in header else None
    xs, counts, shots_col = [], [], []
    for lineno, fields in enumerate(reader, start=2):
        if len(fields) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} fields, got {len(fields)}")
        try:
            xs.append(float(fields[ix]))
            counts.append(int(fields[ic]))
            if ishots is not None:
                shots_col.append(int(fields[ishots]))
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from None
    if not xs:
        raise ParseError("dataset has no rows")
    shots = None
    if "shots" in meta:
        try:
            shots = int(meta["shots"])
        except ValueError:
            raise ParseError(f"invalid shots value {meta['shots']!r}") from None
    if shots_col:
        if len(set(shots_col)) != 1 or (shots is not None and shots_col[0] != shots):
            raise ParseError("shots must be the same for every row")
        shots = shots_col[0]
    if shots is None:
        raise ParseError("missing '# shots=N' header")
    try:
        data = Dataset(np.array(xs), np.array(counts), shots)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return data, meta


def read_dataset(path) -> tuple[Dataset, dict]:
    try:
        with open(path) as fh:
            return parse_dataset(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def format_dataset(data: Dataset, **meta) -> str:
    out = io.StringIO()
    out.write("# shotfit dataset v1\n")
    out.write(f"# shots={data.shots}\n")
    for key, value in meta.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(repr(float(v)) for v in value)
        out.write(f"# {key}={value}\n")
    out.write("x,count\n")
    for xv, k in zip(data.x, data.counts):
        out.write(f"{float(xv)!r},{int(k)}\n")
    return out.getvalue()


def write_dataset(path, data: Dataset, **meta) -> None:
    with open(path, "w") as fh:
        fh.write(format_dataset(data, **meta))


def _clean(value):
    """Convert numpy values to JSON-ready Python objects; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(document: dict) -> str:
    return json.dumps(_clean(document), indent=2, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


def fit_document(model, data: Dataset, result, config) -> dict:
    return _clean(
        {
            "schema": FIT_SCHEMA,
            "model": model.name,
            "method": result.method,
            "params": result.params,
            "theta": result.theta,
            "cost": result.cost,
            "converged": result.converged,
            "n_iterations": result.n_iterations,
            "chi2": result.chi2,
            "dof": data.m - model.n_params,
            "n_sigma": result.n_sigma,
            "shots": data.shots,
            "m": data.m,
            "epsilon": config.regularization(data.shots).epsilon,
            "config": {
                "method": config.method,
                "bootstrap": config.bootstrap,
                "penalty": config.penalty,
                "unsafe_baseline": config.unsafe_baseline,
                "max_iterations": config.optimizer.max_iterations,
                "gradient_tolerance": config.optimizer.gradient_tolerance,
            },
            "predictions": result.predictions,
            "message": result.message,
        }
    )


def bench_payload(report, include_estimates: bool = True) -> dict:
    scenario = report.scenario
    names = list(scenario.model_spec.param_names)
    rows = []
    for row in report.methods:
        st = row.stats
        entry = {
            "label": row.label,
            "convergence_rate": row.convergence_rate,
            "n_failed": row.n_failed,
            "n_simulations": st.n_simulations,
            "bias": st.bias,
            "variance": st.variance,
            "mean_log_likelihood": st.mean_log_likelihood,
            "mean": st.mean,
            "std": st.std,
            "bias_se": st.bias_se,
            "bias_over_std": st.bias_over_std,
        }
        if include_estimates:
            entry["estimates"] = row.estimates
            entry["converged"] = row.converged
            entry["digests"] = row.digests
        rows.append(entry)
    return _clean(
        {
            "schema": BENCH_SCHEMA,
            "scenario": scenario.to_dict(),
            "param_names": names,
            "methods": rows,
        }
    )


def format_table(report) -> str:
    """Summary table: mean, std, bias and bias/std per method and parameter."""
    names = report.scenario.model_spec.param_names
    truth = report.scenario.theta
    lines = [
        f"{'method':<22}{'parameter':<12}{'truth':>12}{'mean':>12}{'std':>12}{'bias':>12}{'bias/std':>10}  conv"
    ]
    for row in report.methods:
        st = row.stats
        for i, name in enumerate(names):
            lines.append(
                f"{row.label:<22}{name:<12}{truth[i]:>12.6g}{st.mean[i]:>12.6g}{st.std[i]:>12.4g}"
                f"{st.bias[i]:>12.4g}{st.bias_over_std[i]:>10.3f}  {row.convergence_rate:.3f}"
            )
    return "\n".join(lines)


_number = {"type": ["number", "null"]}
_vector = {"type": "array", "items": _number}

FIT_RESULT_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": FIT_SCHEMA,
    "type": "object",
    "required": [
        "schema", "model", "method", "params", "theta", "cost", "converged",
        "n_iterations", "chi2", "dof", "n_sigma", "shots", "m", "epsilon", "predictions",
    ],
    "properties": {
        "schema": {"const": FIT_SCHEMA},
        "model": {"type": "string"},
        "method": {"type": "string"},
        "params": {"type": "object", "additionalProperties": _number},
        "theta": _vector,
        "cost": _number,
        "converged": {"type": "boolean"},
        "n_iterations": {"type": "integer", "minimum": 0},
        "chi2": _number,
        "dof": {"type": "integer"},
        "n_sigma": _number,
        "shots": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "epsilon": {"type": "number"},
        "predictions": _vector,
        "config": {"type": "object"},
        "message": {"type": "string"},
    },
}

MV_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": MV_SCHEMA,
    "type": "object",
    "required": ["schema", "model", "method", "chi2", "dof", "n_sigma", "theta"],
    "properties": {
        "schema": {"const": MV_SCHEMA},
        "chi2": {"type": "number"},
        "dof": {"type": "integer", "minimum": 1},
        "n_sigma": {"type": "number"},
        "theta": _vector,
        "threshold": _number,
        "exceeded": {"type": ["boolean", "null"]},
    },
}

BENCH_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": BENCH_SCHEMA,
    "type": "object",
    "required": ["schema", "scenario", "param_names", "methods"],
    "properties": {
        "schema": {"const": BENCH_SCHEMA},
        "scenario": {
            "type": "object",
            "required": ["model", "theta", "shots", "n_simulations", "methods", "seed", "x"],
        },
        "param_names": {"type": "array", "items": {"type": "string"}},
        "methods": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "label", "convergence_rate", "n_failed", "n_simulations", "bias",
                    "variance", "mean", "std", "bias_se", "bias_over_std",
                ],
                "properties": {
                    "label": {"type": "string"},
                    "convergence_rate": {"type": "number", "minimum": 0, "maximum": 1},
                    "n_failed": {"type": "integer", "minimum": 0},
                    "bias": _vector,
                    "variance": _number,
                    "mean": _vector,
                    "std": _vector,
                    "estimates": {"type": "array", "items": _vector},
                    "converged": {"type": "array", "items": {"type": "boolean"}},
                    "digests": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
}
