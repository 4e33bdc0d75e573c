"""Confusion matrix, accuracy, precision/recall/F1, and the kappa statistic.

Kappa is the chance-corrected agreement
``(observed - expected) / (1 - expected)`` where observed accuracy is
``trace / total`` and expected accuracy is the sum over classes of
``row_sum * col_sum / total^2``.

Per-class precision and recall with an empty column or row are defined
as 0 rather than NaN so that aggregates stay finite.  Aggregation is
unweighted ("macro") or by true-class frequency ("weighted"); weighted
is the default throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

AVERAGINGS = ("weighted", "macro")


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """k x k count grid; entry (t, p) = samples of true class t predicted p."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DataError(
            f"true/predicted label sequences must match, got shapes "
            f"{y_true.shape} and {y_pred.shape}"
        )
    if n_classes < 1:
        raise DataError(f"n_classes must be positive, got {n_classes}")
    for name, y in (("true", y_true), ("predicted", y_pred)):
        if y.size and (y.min() < 0 or y.max() >= n_classes):
            raise DataError(f"{name} label out of range [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def _check_matrix(cm: np.ndarray) -> np.ndarray:
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise DataError(f"confusion matrix must be square, got shape {cm.shape}")
    if np.any(cm < 0):
        raise DataError("confusion matrix counts must be non-negative")
    if cm.sum() <= 0:
        raise DataError("confusion matrix is empty")
    return cm.astype(np.int64)


def accuracy(cm: np.ndarray) -> float:
    cm = _check_matrix(cm)
    return float(np.trace(cm) / cm.sum())


def kappa(cm: np.ndarray) -> float:
    cm = _check_matrix(cm)
    total = cm.sum()
    observed = np.trace(cm) / total
    expected = float(cm.sum(axis=1) @ cm.sum(axis=0)) / total**2
    if expected >= 1.0:
        raise DataError(
            "kappa undefined: expected accuracy is 1 (all mass in one cell)"
        )
    return float((observed - expected) / (1.0 - expected))


def classification_metrics(
    cm: np.ndarray, averaging: str = "weighted"
) -> tuple[float, float, float]:
    """(precision, recall, f1) aggregated macro or by true-class frequency."""
    cm = _check_matrix(cm)
    if averaging not in AVERAGINGS:
        raise DataError(f"averaging must be one of {AVERAGINGS}, got {averaging!r}")
    diag = np.diag(cm).astype(np.float64)
    col_sums = cm.sum(axis=0).astype(np.float64)
    row_sums = cm.sum(axis=1).astype(np.float64)
    precision_c = np.divide(diag, col_sums, out=np.zeros_like(diag), where=col_sums > 0)
    recall_c = np.divide(diag, row_sums, out=np.zeros_like(diag), where=row_sums > 0)
    pr_sum = precision_c + recall_c
    f1_c = np.divide(
        2.0 * precision_c * recall_c, pr_sum, out=np.zeros_like(diag), where=pr_sum > 0
    )
    if averaging == "macro":
        w = np.full(cm.shape[0], 1.0 / cm.shape[0])
    else:
        w = row_sums / row_sums.sum()
    return float(w @ precision_c), float(w @ recall_c), float(w @ f1_c)


@dataclass(frozen=True)
class EvalReport:
    """One results-table row: headline metrics plus the confusion matrix.

    ``precision``/``recall``/``f1`` are aggregated per ``averaging``;
    ``epochs_run``/``final_loss`` are 0 for models without a training
    loop (KNN, Gaussian NB).
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    kappa: float
    confusion: np.ndarray
    epochs_run: int = 0
    final_loss: float = 0.0
    averaging: str = "weighted"

    def __post_init__(self):
        object.__setattr__(self, "confusion", _check_matrix(self.confusion))
        values = (self.accuracy, self.precision, self.recall, self.f1, self.kappa)
        if not all(np.isfinite(v) for v in values) or not np.isfinite(self.final_loss):
            raise DataError("report metrics must be finite")
        if self.kappa > self.accuracy + 1e-12:
            raise DataError(
                f"kappa {self.kappa} exceeds accuracy {self.accuracy}"
            )
        if self.final_loss < 0:
            raise DataError(f"loss must be non-negative, got {self.final_loss}")


def evaluate(
    y_true,
    y_pred,
    n_classes: int,
    epochs_run: int = 0,
    final_loss: float = 0.0,
    averaging: str = "weighted",
) -> EvalReport:
    """Score predictions against truth and assemble an EvalReport."""
    cm = confusion_matrix(y_true, y_pred, n_classes)
    precision, recall, f1 = classification_metrics(cm, averaging)
    return EvalReport(
        accuracy=accuracy(cm),
        precision=precision,
        recall=recall,
        f1=f1,
        kappa=kappa(cm),
        confusion=cm,
        epochs_run=epochs_run,
        final_loss=final_loss,
        averaging=averaging,
    )
