"""Render evaluation results as delimited text, aligned tables, or JSON.

The CSV flavor mirrors the results-table row schema: a header
``accuracy,precision,recall,f1,kappa,epochs,loss``, one data row with
the metric percentages to two decimals, then the confusion matrix
appended as a k x k block of counts.  The text flavor prints the same
numbers in an aligned table with both aggregation flavors of
precision/recall/F1.  JSON keeps full float precision and optionally
the per-epoch training history, so a report can be re-rendered later.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError, WriteError
from .metrics import EvalReport, classification_metrics
from .mlp import TrainHistory


def report_to_csv(report: EvalReport) -> str:
    pct = [
        f"{100.0 * v:.2f}"
        for v in (report.accuracy, report.precision, report.recall, report.f1, report.kappa)
    ]
    lines = [
        "accuracy,precision,recall,f1,kappa,epochs,loss",
        ",".join(pct + [str(report.epochs_run), f"{report.final_loss:.4f}"]),
    ]
    for row in report.confusion:
        lines.append(",".join(str(int(c)) for c in row))
    return "\n".join(lines) + "\n"


def report_to_text(report: EvalReport) -> str:
    other = "macro" if report.averaging == "weighted" else "weighted"
    o_prec, o_rec, o_f1 = classification_metrics(report.confusion, other)
    rows = [
        ("accuracy %", f"{100.0 * report.accuracy:.2f}"),
        (f"precision ({report.averaging}) %", f"{100.0 * report.precision:.2f}"),
        (f"recall ({report.averaging}) %", f"{100.0 * report.recall:.2f}"),
        (f"f1 ({report.averaging}) %", f"{100.0 * report.f1:.2f}"),
        (f"precision ({other}) %", f"{100.0 * o_prec:.2f}"),
        (f"recall ({other}) %", f"{100.0 * o_rec:.2f}"),
        (f"f1 ({other}) %", f"{100.0 * o_f1:.2f}"),
        ("kappa %", f"{100.0 * report.kappa:.2f}"),
        ("epochs", str(report.epochs_run)),
        ("loss", f"{report.final_loss:.4f}"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{name:<{width}}  {value:>8}" for name, value in rows]
    lines.append("")
    lines.append("confusion matrix (rows: true, cols: predicted)")
    k = report.confusion.shape[0]
    cell = max(5, len(str(int(report.confusion.max()))) + 1)
    header = " " * 7 + "".join(f"{'p' + str(c):>{cell}}" for c in range(k))
    lines.append(header)
    for t in range(k):
        counts = "".join(f"{int(report.confusion[t, p]):>{cell}}" for p in range(k))
        lines.append(f"{'t' + str(t):<7}{counts}")
    return "\n".join(lines) + "\n"


def report_to_json(report: EvalReport, history: TrainHistory | None = None) -> str:
    payload = {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "kappa": report.kappa,
        "confusion": report.confusion.tolist(),
        "epochs_run": report.epochs_run,
        "final_loss": report.final_loss,
        "averaging": report.averaging,
    }
    if history is not None:
        payload["history"] = {
            "train_loss": history.train_loss,
            "val_loss": history.val_loss,
            "val_accuracy": history.val_accuracy,
            "epochs_run": history.epochs_run,
            "best_epoch": history.best_epoch,
        }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_report_json(path) -> tuple[EvalReport, TrainHistory | None]:
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise WriteError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"not a JSON report: {path}: {exc}") from exc
    try:
        report = EvalReport(
            accuracy=payload["accuracy"],
            precision=payload["precision"],
            recall=payload["recall"],
            f1=payload["f1"],
            kappa=payload["kappa"],
            confusion=np.asarray(payload["confusion"], dtype=np.int64),
            epochs_run=payload["epochs_run"],
            final_loss=payload["final_loss"],
            averaging=payload.get("averaging", "weighted"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed JSON report {path}: {exc}") from exc
    history = None
    if "history" in payload:
        h = payload["history"]
        history = TrainHistory(
            train_loss=list(h["train_loss"]),
            val_loss=list(h["val_loss"]),
            val_accuracy=list(h["val_accuracy"]),
            epochs_run=h["epochs_run"],
            best_epoch=h["best_epoch"],
        )
    return report, history


def emit_report(report: EvalReport, fmt: str, path) -> None:
    """Write one rendering of *report*; fmt is "text" or "csv"."""
    renderers = {"text": report_to_text, "csv": report_to_csv}
    if fmt not in renderers:
        raise DataError(f"unknown report format {fmt!r}")
    content = renderers[fmt](report)
    try:
        Path(path).write_text(content)
    except OSError as exc:
        raise WriteError(f"cannot write report {path}: {exc}") from exc
