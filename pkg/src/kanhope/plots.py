"""Figure rendering for the report path.

Every figure goes to a file next to the delimited output; nothing is
shown interactively, so the Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import ConfusionMatrix, ReportRow


def save_confusion_heatmap(matrix: ConfusionMatrix, path: str | Path, title: str = "") -> Path:
    """Confusion-matrix heatmap with per-cell counts, rows = true classes."""
    counts = matrix.counts
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(matrix.class_names)), matrix.class_names)
    ax.set_yticks(range(len(matrix.class_names)), matrix.class_names)
    ax.set_xlabel("Predicted")
    ax.set_ylabel("True")
    if title:
        ax.set_title(title)
    threshold = counts.max() / 2 if counts.size else 0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(
                j,
                i,
                str(int(counts[i, j])),
                ha="center",
                va="center",
                color="white" if counts[i, j] > threshold else "black",
            )
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_model_comparison(rows: Sequence[ReportRow], path: str | Path) -> Path:
    """Horizontal bars of seed-averaged weighted F1 per model."""
    names = [row.model_id for row in rows]
    scores = [row.weighted[2] for row in rows]
    fig, ax = plt.subplots(figsize=(6.4, 0.5 * max(len(names), 3) + 1.2))
    ypos = np.arange(len(names))
    ax.barh(ypos, scores, color="#4878cf")
    ax.set_yticks(ypos, names)
    ax.invert_yaxis()
    ax.set_xlabel("Weighted F1")
    ax.set_xlim(0, 1)
    for y, s in zip(ypos, scores):
        ax.text(s + 0.01, y, f"{s:.3f}", va="center")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_training_history(history, path: str | Path) -> Path:
    """Train loss and dev weighted F1 over epochs."""
    epochs = [h.epoch for h in history]
    losses = [h.train_loss for h in history]
    dev = [h.dev_weighted_f1 for h in history]
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    ax.plot(epochs, losses, marker="o", label="train loss")
    ax.set_xlabel("Epoch")
    ax.set_ylabel("Train loss")
    if not all(np.isnan(dev)):
        ax2 = ax.twinx()
        ax2.plot(epochs, dev, marker="s", color="#d65f5f", label="dev weighted F1")
        ax2.set_ylabel("Dev weighted F1")
        ax2.set_ylim(0, 1)
    ax.legend(loc="upper right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_label_distribution(counts: dict[str, int], path: str | Path, title: str = "") -> Path:
    """Bar chart of label counts (e.g. before/after label filtering)."""
    names = list(counts)
    values = [counts[n] for n in names]
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.bar(names, values, color=["#4878cf", "#d65f5f", "#6acc65"][: len(names)])
    ax.set_ylabel("Comments")
    if title:
        ax.set_title(title)
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
