"""Binary classification metrics: confusion counts and the derived scalars.

A metric whose denominator is zero is *undefined* and reported as ``None``
(rendered ``n/a`` in CSV output), never silently coerced to 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import check_signed_labels

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "confusion",
    "compute_report",
    "report_from_predictions",
    "format_metric",
    "write_report_csv",
    "write_confusion_csv",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = ("stage", "model", "kernel", "margin", "accuracy", "precision", "sensitivity", "f_score", "hinge_loss")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """The evaluation scalars; ``None`` marks an undefined or absent value."""

    accuracy: float | None
    precision: float | None
    sensitivity: float | None
    f_score: float | None
    hinge: float | None = None

    @property
    def recall(self) -> float | None:
        return self.sensitivity


def confusion(predicted, actual, positive_class: int = 1) -> ConfusionMatrix:
    """Count tp/tn/fp/fn for {-1, +1} label vectors."""
    predicted = check_signed_labels(predicted, name="predicted")
    actual = check_signed_labels(actual, len(predicted), name="actual")
    if positive_class not in (-1, 1):
        raise ValueError(f"positive_class must be -1 or +1, got {positive_class}")
    pos_pred = predicted == positive_class
    pos_act = actual == positive_class
    return ConfusionMatrix(
        tp=int(np.sum(pos_pred & pos_act)),
        tn=int(np.sum(~pos_pred & ~pos_act)),
        fp=int(np.sum(pos_pred & ~pos_act)),
        fn=int(np.sum(~pos_pred & pos_act)),
    )


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def compute_report(cm: ConfusionMatrix, hinge: float | None = None) -> MetricsReport:
    """Accuracy, precision, sensitivity (recall) and F-score from counts."""
    if cm.total < 1:
        raise ValueError("confusion matrix is empty")
    return MetricsReport(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=_ratio(cm.tp, cm.tp + cm.fp),
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
        f_score=_ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn),
        hinge=hinge,
    )


def report_from_predictions(predicted, actual, hinge: float | None = None) -> MetricsReport:
    return compute_report(confusion(predicted, actual), hinge=hinge)


def format_metric(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def write_report_csv(rows: list[dict], path: str | Path) -> None:
    """Write report rows in the fixed column order.

    Each row maps column names to strings, numbers, a MetricsReport-derived
    value or None; metric columns are formatted to 4 decimals with undefined
    values rendered as ``n/a``.
    """
    lines = [",".join(REPORT_COLUMNS)]
    metric_cols = {"accuracy", "precision", "sensitivity", "f_score", "hinge_loss"}
    for row in rows:
        cells = []
        for col in REPORT_COLUMNS:
            value = row.get(col)
            if col in metric_cols:
                cells.append(format_metric(value))
            else:
                cells.append("" if value is None else str(value))
        lines.append(",".join(cells))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def write_confusion_csv(cm: ConfusionMatrix, path: str | Path) -> None:
    """2x2 layout with actual classes as rows and predicted as columns."""
    lines = [
        ",pred_pos,pred_neg",
        f"actual_pos,{cm.tp},{cm.fn}",
        f"actual_neg,{cm.fp},{cm.tn}",
    ]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
