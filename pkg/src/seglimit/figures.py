"""Figure rendering for the report path: density fields, ladder diagnostics,
and rate fits, written next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_tuple(grid, u, path, title=None):
    """Render a density tuple: line plot in 1D, per-species heatmaps in 2D."""
    arr = u.u if hasattr(u, "u") else np.asarray(u)
    m = arr.shape[0]
    if grid.dim == 1:
        (xs,) = grid.coords()
        fig, ax = plt.subplots(figsize=(7, 4))
        for i in range(m):
            ax.plot(xs, arr[i], label=f"$u_{{{i + 1}}}$")
        ax.set_xlabel("x")
        ax.set_ylabel("density")
        ax.grid(True, alpha=0.3)
        ax.legend()
    else:
        fig, axes = plt.subplots(1, m, figsize=(4.2 * m, 4), squeeze=False)
        X, Y = grid.coords()
        for i in range(m):
            ax = axes[0][i]
            masked = np.ma.masked_where(grid.exterior, arr[i])
            pc = ax.pcolormesh(X, Y, masked, shading="nearest", cmap="viridis")
            fig.colorbar(pc, ax=ax, shrink=0.85)
            ax.set_title(f"$u_{{{i + 1}}}$")
            ax.set_aspect("equal")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_ladder(rows, path):
    """Overlap and residual against eps on log-log axes.

    rows: dicts with epsilon/overlap/residual keys (finite-eps entries only).
    """
    eps = [r["epsilon"] for r in rows if r["epsilon"] > 0]
    overlap = [r["overlap"] for r in rows if r["epsilon"] > 0]
    res = [r["residual"] for r in rows if r["epsilon"] > 0]
    if not eps:
        return
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(eps, overlap, "o-", label="overlap")
    ax.loglog(eps, res, "s--", label="residual")
    ax.set_xlabel(r"$\varepsilon$")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_ratefit(fits, path):
    """H1 distances per species with their fitted power laws."""
    fig, ax = plt.subplots(figsize=(6.5, 4.8))
    for key, fit in fits.items():
        if key == "worst":
            continue
        eps = [e for e, _ in fit.samples]
        d = [v for _, v in fit.samples]
        (line,) = ax.loglog(eps, d, "o", label=f"$u_{{{key + 1}}}$: slope {fit.slope:.3f}")
        xs = np.array([min(eps), max(eps)])
        ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope, "--",
                  color=line.get_color(), alpha=0.7)
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel("$H^1$ distance to limit")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
