"""Static SVG figures for fits, ensembles, cost slices and variance curves."""
from __future__ import annotations

import numpy as np

__all__ = [
    "plot_fit",
    "plot_histograms",
    "plot_scatter",
    "plot_landscape",
    "plot_variance_report",
]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "shotfit"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()
    import matplotlib.pyplot as plt

    plt.close(fig)


def plot_fit(path, model, data, result, title=None):
    """Measured fractions with the fitted model curve."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    grid = np.linspace(data.x.min(), data.x.max(), 400)
    ax.plot(data.x, data.y, "o", ms=4, label="measured fraction")
    ax.plot(grid, model.evaluate(grid, result.theta), "-", label=f"{result.method} fit")
    ax.set_xlabel("x")
    ax.set_ylabel("fraction")
    text = ", ".join(f"{k}={v:.4g}" for k, v in result.params.items())
    ax.set_title(title or f"{model.name}: N_sigma={result.n_sigma:.2f}", fontsize=10)
    ax.text(0.01, 0.01, text, transform=ax.transAxes, fontsize=7)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_histograms(path, report, param):
    """Histogram of one estimated parameter for every method of a bench report."""
    plt = _pyplot()
    labels = report.labels
    names = report.scenario.model_spec.param_names
    truth = report.scenario.theta[names.index(param)]
    fig, axes = plt.subplots(len(labels), 1, figsize=(6, 1.6 * len(labels)), sharex=True, squeeze=False)
    for ax, label in zip(axes[:, 0], labels):
        col = report.column(label, param)
        st = report[label].stats
        i = names.index(param)
        ax.hist(col, bins=60)
        ax.axvline(truth, color="k", lw=1)
        ax.set_title(
            f"{label}: mean {st.mean[i]:.4g} std {st.std[i]:.3g} bias {st.bias[i]:.3g} "
            f"bias/std {st.bias_over_std[i]:.2f}",
            fontsize=8,
        )
    axes[-1, 0].set_xlabel(param)
    fig.tight_layout()
    _save(fig, path)


def plot_scatter(path, xs, ys, xlabel, ylabel, reference_line=None):
    """Scatter panel; ``reference_line`` is an optional ``(slope, intercept)``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(xs, ys, ".", ms=2, alpha=0.5)
    if reference_line is not None:
        slope, intercept = reference_line
        lim = np.array([np.nanmin(xs), np.nanmax(xs)])
        ax.plot(lim, slope * lim + intercept, "k--", lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    _save(fig, path)


def plot_landscape(path, curves: dict, xlabel="parameter"):
    """Overlay of cost slices, ``curves`` maps a label to ``{"value", "cost"}``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, table in curves.items():
        ax.plot(table["value"], table["cost"], label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("cost")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_variance_report(path, table: dict, shots: int):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for key in ("baseline", "jeffreys", "wilson"):
        ax.plot(table["y"], table[key], label=key)
    ax.set_xlabel("measured fraction")
    ax.set_ylabel("variance estimate")
    ax.set_title(f"N = {shots}", fontsize=10)
    ax.legend(fontsize=8)
    _save(fig, path)
