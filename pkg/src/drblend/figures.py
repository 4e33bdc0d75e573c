"""Matplotlib renderings that accompany the delimited reports.

Two figures per run: a confusion-matrix heatmap with annotated counts,
and (when a training history exists) loss/accuracy curves over epochs
with the selected epoch marked.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import WriteError
from .metrics import EvalReport
from .mlp import TrainHistory


def plot_confusion_matrix(report: EvalReport, path) -> Path:
    cm = report.confusion
    k = cm.shape[0]
    fig, ax = plt.subplots(figsize=(1.1 * k + 2.2, 1.1 * k + 1.8))
    im = ax.imshow(cm, cmap="Blues")
    threshold = cm.max() / 2.0
    for t in range(k):
        for p in range(k):
            ax.text(
                p,
                t,
                str(int(cm[t, p])),
                ha="center",
                va="center",
                color="white" if cm[t, p] > threshold else "black",
            )
    ax.set_xticks(range(k))
    ax.set_yticks(range(k))
    ax.set_xlabel("predicted class")
    ax.set_ylabel("true class")
    ax.set_title(f"accuracy {100 * report.accuracy:.2f}%  kappa {100 * report.kappa:.2f}%")
    fig.colorbar(im, ax=ax, fraction=0.046)
    return _save(fig, path)


def plot_training_curves(history: TrainHistory, path) -> Path:
    epochs = np.arange(1, history.epochs_run + 1)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(epochs, history.train_loss, label="train loss")
    ax.plot(epochs, history.val_loss, label="validation loss")
    ax.axvline(history.best_epoch + 1, color="gray", ls="--", lw=1, label="selected epoch")
    ax.set_xlabel("epoch")
    ax.set_ylabel("cross-entropy loss")
    ax2 = ax.twinx()
    ax2.plot(epochs, history.val_accuracy, color="tab:green", alpha=0.6, label="validation accuracy")
    ax2.set_ylabel("validation accuracy")
    ax2.set_ylim(0.0, 1.02)
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="center right")
    return _save(fig, path)


def render_figures(
    report: EvalReport, history: TrainHistory | None, out_dir
) -> list[Path]:
    """Write all applicable figures into *out_dir*; returns their paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WriteError(f"cannot create figure directory {out_dir}: {exc}") from exc
    written = [plot_confusion_matrix(report, out_dir / "confusion_matrix.png")]
    if history is not None and history.epochs_run > 0:
        written.append(plot_training_curves(history, out_dir / "training_curves.png"))
    return written


def _save(fig, path) -> Path:
    path = Path(path)
    try:
        fig.savefig(path, dpi=150, bbox_inches="tight")
    except OSError as exc:
        raise WriteError(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path
