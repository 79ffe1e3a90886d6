"""Figure rendering for the command-line reports.

Every plot lands in a file next to the delimited output; nothing is shown
interactively.  Figures are deliberately plain: one idea per panel, shared
color scales where panels are compared.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_trace_figure",
    "save_lcurve_figure",
    "save_model_figure",
    "save_models_figure",
    "save_signals_figure",
    "save_compare_figure",
    "save_rmse_figure",
]

plt.rcParams.update({
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
})


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def save_trace_figure(path, trace, title: str = "convergence") -> str:
    """Objective value per iteration; adds the smoothed objective if traced."""
    it = trace.values("iter")
    f = trace.values("F")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(it, f, marker=".", label="F")
    h = trace.values("H")
    if np.isfinite(h).any():
        ax.semilogy(it, h, linestyle="--", label="smoothed H")
        ax.legend()
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_title(title)
    return _finish(fig, path)


def save_lcurve_figure(path, lc, corner=None, title: str = "L-curve") -> str:
    """Residual/penalty trade-off, its curvature, and percent error if known."""
    kap = lc.curvature
    panels = 2 + (lc.errors is not None)
    fig, axes = plt.subplots(1, panels, figsize=(5 * panels, 4))
    axes = np.atleast_1d(axes)

    ax = axes[0]
    ax.plot(lc.log_residual, lc.log_penalty, marker=".")
    if corner is not None:
        ax.plot(lc.log_residual[corner.index], lc.log_penalty[corner.index],
                "o", color="crimson",
                label=f"corner (lam={corner.lam:.3g})" + ("" if corner.distinct else ", weak"))
        ax.legend()
    ax.set_xlabel("log ||Ax - b||")
    ax.set_ylabel("log ||x||")
    ax.set_title(title)

    loglam = np.log10(lc.lambdas)
    ax = axes[1]
    if kap is not None:
        ax.plot(loglam, kap, marker=".")
        if corner is not None:
            ax.axvline(loglam[corner.index], color="crimson", linestyle=":")
    ax.set_xlabel("log10 lambda")
    ax.set_ylabel("curvature")
    ax.set_title("L-curve curvature")

    if lc.errors is not None:
        ax = axes[2]
        ax.plot(loglam, lc.errors, marker=".")
        best = int(np.argmin(lc.errors))
        ax.axvline(loglam[best], color="seagreen", linestyle="--", label="min error")
        if corner is not None:
            ax.axvline(loglam[corner.index], color="crimson", linestyle=":", label="corner")
        ax.legend()
        ax.set_xlabel("log10 lambda")
        ax.set_ylabel("percent model error")
        ax.set_title("error along the path")

    return _finish(fig, path)


def save_model_figure(path, x: np.ndarray, grid: int | None = None,
                      title: str = "model") -> str:
    """Single model: image if a grid size is given, line plot otherwise."""
    fig, ax = plt.subplots(figsize=(5, 4))
    if grid is not None and grid * grid == x.size:
        im = ax.imshow(x.reshape(grid, grid), cmap="RdBu_r", origin="lower")
        fig.colorbar(im, ax=ax, shrink=0.85)
        ax.grid(False)
    else:
        ax.plot(x)
        ax.set_xlabel("index")
    ax.set_title(title)
    return _finish(fig, path)


def save_models_figure(path, models: dict, grid: int, suptitle: str = "") -> str:
    """Row of images on a shared symmetric color scale."""
    names = list(models)
    vmax = max(float(np.max(np.abs(v))) for v in models.values()) or 1.0
    fig, axes = plt.subplots(1, len(names), figsize=(3.4 * len(names), 3.4))
    axes = np.atleast_1d(axes)
    for ax, name in zip(axes, names):
        im = ax.imshow(models[name].reshape(grid, grid), cmap="RdBu_r",
                       origin="lower", vmin=-vmax, vmax=vmax)
        ax.set_title(name)
        ax.grid(False)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.colorbar(im, ax=list(axes), shrink=0.8)
    if suptitle:
        fig.suptitle(suptitle)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def save_signals_figure(path, signals: dict, title: str = "") -> str:
    """Overlayed 1-D signals (truth vs reconstructions)."""
    fig, ax = plt.subplots(figsize=(8, 4))
    for name, v in signals.items():
        lw = 2.0 if name == "truth" else 1.2
        ax.plot(v, label=name, linewidth=lw)
    ax.legend()
    ax.set_xlabel("index")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def save_compare_figure(path, steps: np.ndarray, medians: dict,
                        title: str = "median objective per continuation step") -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for name, vals in medians.items():
        ax.semilogy(steps, vals, marker="o", label=name)
    ax.set_xlabel("lambda step")
    ax.set_ylabel("median objective")
    ax.set_title(title)
    ax.legend()
    return _finish(fig, path)


def save_rmse_figure(path, rmse_by_label: dict, title: str = "model RMSE per seed") -> str:
    """Strip plot of per-seed RMSEs for each solver variant, medians marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (label, vals) in enumerate(rmse_by_label.items()):
        vals = np.asarray(vals, dtype=np.float64)
        ax.plot(np.full(vals.size, i), vals, "o", alpha=0.6)
        ax.plot([i - 0.2, i + 0.2], [np.median(vals)] * 2, color="k", linewidth=2)
    ax.set_xticks(range(len(rmse_by_label)), list(rmse_by_label))
    ax.set_ylabel("RMSE")
    ax.set_title(title)
    return _finish(fig, path)
