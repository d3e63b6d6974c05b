"""Figure rendering for the command-line report path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_bounds(trace, path) -> Path:
    """Lower/upper bound trajectories over iterations."""
    trace = np.asarray(trace, dtype=float)
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(trace[:, 0], trace[:, 1], label="lower bound")
    ax.plot(trace[:, 0], trace[:, 2], label="upper bound")
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_tables(tables, labels, path, ylabel="psi") -> Path:
    """Per-variable bar charts of table entries."""
    path = Path(path)
    n = len(tables)
    cols = min(n, 4)
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.4 * rows),
                             squeeze=False)
    for i, table in enumerate(tables):
        ax = axes[i // cols][i % cols]
        vals = np.asarray(table, dtype=float)
        ax.bar(np.arange(vals.size), vals)
        ax.set_title(labels[i], fontsize=9)
        ax.set_ylabel(ylabel, fontsize=8)
        ax.tick_params(labelsize=7)
    for k in range(n, rows * cols):
        axes[k // cols][k % cols].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_fields(xs, psi, labels, path) -> Path:
    """Overlaid field curves on a shared grid."""
    path = Path(path)
    psi = np.asarray(psi, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i in range(psi.shape[0]):
        ax.plot(xs, psi[i], label=labels[i])
    ax.set_xlabel("x")
    ax.set_ylabel("psi")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
