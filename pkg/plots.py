"""
SVG line charts of trends, grid functions and circle data.
"""
import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({"font.size": 10, "svg.hashsalt": "weightlab"})

import numpy as np
from matplotlib.figure import Figure

_SVG_METADATA = {"Date": None, "Creator": "weightlab"}


def trend_figure(trends, title=""):
    """One line per TrendReport, log scale on both axes; overflow points are dropped."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for trend in trends:
        x = np.asarray(trend.params, dtype=float)
        y = np.asarray(trend.values, dtype=float)
        keep = np.isfinite(y) & (y > 0.0)
        ax.plot(x[keep], y[keep], marker="o", label=f"{trend.label} ({trend.verdict})")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("parameter")
    ax.set_ylabel("value")
    ax.set_title(title)
    if trends:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def grid_figure(grids, labels, title="", log=False):
    """Step plots of GridFunctions over their cells."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for grid, label in zip(grids, labels):
        edges = grid.edges
        ax.stairs(grid.values, edges, label=label)
    if log:
        ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def circle_figure(grids, labels, title=""):
    """Moduli of circle data against θ."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for grid, label in zip(grids, labels):
        ax.plot(grid.theta, np.abs(grid.values), label=label)
    ax.set_xlabel("θ")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def save_svg(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
