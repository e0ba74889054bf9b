"""Diagnostic raster plots: birth-persistence scatter and PI tile grids."""

from __future__ import annotations

import numpy as np


def _agg():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_diagram(pd, out_path) -> None:
    """Birth-persistence scatter of a diagram (blank axes when empty)."""
    plt = _agg()
    fig, ax = plt.subplots(figsize=(4, 4))
    if len(pd):
        births = pd.points[:, 0]
        pers = pd.points[:, 1] - pd.points[:, 0]
        ax.scatter(births, pers, s=18, c="tab:blue")
    ax.set_xlabel("birth")
    ax.set_ylabel("persistence")
    ax.set_title("birth-persistence diagram")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_descriptor(desc, grid, out_path) -> None:
    """One heatmap tile per slice block of a descriptor."""
    plt = _agg()
    rows, cols = grid
    blocks = desc.blocks()
    n = max(1, desc.n_slices)
    fig, axes = plt.subplots(1, n, figsize=(2.2 * n, 2.4), squeeze=False)
    vmax = float(blocks.max()) if blocks.size else 1.0
    for i in range(n):
        ax = axes[0][i]
        img = blocks[i].reshape(rows, cols) if i < blocks.shape[0] else np.zeros(grid)
        ax.imshow(img, origin="lower", cmap="viridis", vmin=0.0, vmax=vmax or 1.0)
        ax.set_title(f"slice {i}", fontsize=8)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
