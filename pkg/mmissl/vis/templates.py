"""
This submodule is a home for templates for quickly
regenerating common visualisations from metrics tables.
"""
from pathlib import Path
import matplotlib.pyplot as plt
from pyrolite.util.meta import subkwargs
from .style import term_color, extreme_linestyle

LOSS_COLUMNS = ["loss_total", "loss_align", "loss_z", "loss_zp"]
EXTREME_COLUMNS = [
    "lmin_align",
    "lmax_align",
    "lmin_z",
    "lmax_z",
    "lmin_zp",
    "lmax_zp",
]


def _axes(ax, **kwargs):
    if ax is None:
        fig, ax = plt.subplots(1, **subkwargs(kwargs, plt.figure))
    return ax


def plot_loss_curves(metrics, xvar="step", columns=None, legend=True, ax=None, **kwargs):
    """
    Loss total and terms against the optimizer step.

    Parameters
    -----------
    metrics : :class:`pandas.DataFrame`
        Metrics table.
    columns : :class:`list`
        Columns to draw; all loss columns by default.

    Returns
    ---------
    :class:`matplotlib.axes.Axes`
    """
    ax = _axes(ax, **kwargs)
    for col in columns or LOSS_COLUMNS:
        ax.plot(metrics[xvar].values, metrics[col].values, color=term_color(col), label=col)
    ax.set_xlabel(xvar)
    ax.set_ylabel("loss")
    if legend:
        ax.legend(frameon=False, loc="upper left", bbox_to_anchor=(1, 1))
    return ax


def plot_tracked_extremes(metrics, xvar="step", legend=True, ax=None, **kwargs):
    """
    Tracked eigenvalue extremes of each loss term against the optimizer step.

    Returns
    ---------
    :class:`matplotlib.axes.Axes`
    """
    ax = _axes(ax, **kwargs)
    for col in EXTREME_COLUMNS:
        ax.plot(
            metrics[xvar].values,
            metrics[col].values,
            color=term_color(col),
            ls=extreme_linestyle(col),
            label=col,
        )
    ax.set_xlabel(xvar)
    ax.set_ylabel(r"$\lambda$")
    if legend:
        ax.legend(frameon=False, loc="upper left", bbox_to_anchor=(1, 1))
    return ax


def save_svg(ax, path):
    """Save the figure holding `ax` as SVG and close it."""
    fig = ax.figure
    path = Path(path).with_suffix(".svg")
    fig.savefig(str(path), format="svg", bbox_inches="tight")
    plt.close(fig)
    return path
