"""
plots.py  —  Loss-curve figures written next to training reports.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

log = logging.getLogger(__name__)

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def plot_loss_curves(curves: Mapping[str, Sequence[float]], path: str | Path, title: str = "Training loss",
                     ylabel: str = "mean loss") -> Path | None:
    """One line per model; returns the written path, or None when there is nothing to draw."""
    curves = {name: list(vals) for name, vals in curves.items() if len(vals)}
    if not curves:
        log.warning("no losses to plot for %s", path)
        return None
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i, (name, losses) in enumerate(curves.items()):
        ax.plot(range(1, len(losses) + 1), losses, marker="o", ms=3, lw=1.5,
                color=PALETTE[i % len(PALETTE)], label=name)
    ax.set_title(title, fontweight="bold")
    ax.set_xlabel("epoch")
    ax.set_ylabel(ylabel)
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.grid(alpha=0.3)
    if len(curves) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    log.info("wrote %s", path)
    return path
