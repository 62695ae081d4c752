"""Figure helpers for the report path.

Everything renders through the Agg backend straight to files; no display is
assumed.  Figures are diagnostic companions to the delimited output, not a
substitute for it, so they favor legibility over configurability.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import ComparisonRecord, ObservableRecord
from .evolution import Trajectory


def density_figure(traj: Trajectory, path: str | Path) -> None:
    """Space-time density carpet for 1D runs; final-state map for 2D."""
    grid = traj.snapshots[0].grid
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    if grid.ndim == 1:
        carpet = np.stack([s.p for s in traj.snapshots])
        im = ax.imshow(
            carpet,
            origin="lower",
            aspect="auto",
            extent=(grid.lower[0], grid.upper[0], traj.times[0], traj.times[-1]),
            cmap="magma",
        )
        ax.set_xlabel("x")
        ax.set_ylabel("t")
        fig.colorbar(im, ax=ax, label="p")
    elif grid.ndim == 2:
        final = traj.snapshots[-1]
        im = ax.imshow(
            final.p.T,
            origin="lower",
            extent=(grid.lower[0], grid.upper[0], grid.lower[1], grid.upper[1]),
            cmap="magma",
        )
        ax.set_xlabel("x_0")
        ax.set_ylabel("x_1")
        ax.set_title(f"p at t = {final.time:.4g}")
        fig.colorbar(im, ax=ax, label="p")
    else:
        ax.axis("off")
        ax.text(0.5, 0.5, f"{grid.ndim}D density rendering not supported",
                ha="center", va="center")
    fig.savefig(path, dpi=150)
    plt.close(fig)


def observable_figure(records: list[ObservableRecord], path: str | Path) -> None:
    t = np.array([r.time for r in records])
    ndim = len(records[0].mean)
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0), constrained_layout=True)

    ax = axes[0, 0]
    ax.plot(t, np.array([r.norm for r in records]) - 1.0)
    ax.set_title("norm - 1")

    ax = axes[0, 1]
    e = np.array([r.energy for r in records])
    scale = max(abs(e[0]), 1e-300)
    ax.plot(t, (e - e[0]) / scale)
    ax.set_title("relative energy drift")

    ax = axes[1, 0]
    for k in range(ndim):
        ax.plot(t, [r.variance[k] for r in records], label=f"axis {k}")
        ax.plot(t, [r.mean[k] for r in records], ls="--", label=f"mean {k}")
    ax.legend(fontsize=8)
    ax.set_title("position mean and variance")

    ax = axes[1, 1]
    ax.plot(t, [r.max_q for r in records])
    ax.set_title("max |Q| on the bright region")

    for ax in axes.ravel():
        ax.set_xlabel("t")
    fig.savefig(path, dpi=150)
    plt.close(fig)


def comparison_figure(records: list[ComparisonRecord], path: str | Path) -> None:
    t = np.array([r.time for r in records])
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    tiny = 1e-17
    ax.semilogy(t, np.array([r.l2_density for r in records]) + tiny, label="L2 density gap")
    ax.semilogy(t, 1.0 - np.array([r.fidelity for r in records]) + tiny, label="1 - fidelity")
    ax.set_xlabel("t")
    ax.legend()
    ax.set_title("hydrodynamic run vs reference solver")
    fig.savefig(path, dpi=150)
    plt.close(fig)
