"""Regression and thresholded classification metrics over (prediction, label) pairs.

Zero-denominator classification cases are flagged as None, never NaN. A value
exactly at a threshold counts as positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RegressionMetrics:
    pearson: float | None   # None when either side has zero variance
    mae: float
    rmse: float


@dataclass(frozen=True)
class ClassificationMetrics:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class EvalReport:
    regression: RegressionMetrics
    thresholds: tuple[ClassificationMetrics, ...]


def _check_lengths(preds, labels, minimum=1):
    if len(preds) != len(labels):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(labels)} labels")
    if len(preds) < minimum:
        raise ValueError(f"need at least {minimum} pairs, got {len(preds)}")


def regression_metrics(preds, labels) -> RegressionMetrics:
    preds, labels = list(map(float, preds)), list(map(float, labels))
    _check_lengths(preds, labels, minimum=2)
    n = len(preds)
    mae = sum(abs(p - l) for p, l in zip(preds, labels)) / n
    rmse = math.sqrt(sum((p - l) ** 2 for p, l in zip(preds, labels)) / n)
    mp = sum(preds) / n
    ml = sum(labels) / n
    cov = sum((p - mp) * (l - ml) for p, l in zip(preds, labels))
    var_p = sum((p - mp) ** 2 for p in preds)
    var_l = sum((l - ml) ** 2 for l in labels)
    if var_p == 0.0 or var_l == 0.0:
        pearson = None
    else:
        pearson = cov / math.sqrt(var_p * var_l)
    return RegressionMetrics(pearson=pearson, mae=mae, rmse=rmse)


def _confusion(pred_flags, label_flags, threshold) -> ClassificationMetrics:
    tp = sum(1 for p, l in zip(pred_flags, label_flags) if p and l)
    fp = sum(1 for p, l in zip(pred_flags, label_flags) if p and not l)
    tn = sum(1 for p, l in zip(pred_flags, label_flags) if not p and not l)
    fn = sum(1 for p, l in zip(pred_flags, label_flags) if not p and l)
    n = tp + fp + tn + fn
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(threshold=threshold, tp=tp, fp=fp, tn=tn, fn=fn,
                                 accuracy=accuracy, precision=precision,
                                 recall=recall, f1=f1)


def classification_metrics(preds, labels, threshold: float = 0.75) -> ClassificationMetrics:
    """Binarize predictions and labels at the same threshold (>= is positive)."""
    _check_lengths(preds, labels)
    return _confusion([p >= threshold for p in preds],
                      [l >= threshold for l in labels], threshold)


def threshold_sweep(preds, labels, thresholds, label_threshold: float | None = None):
    """One confusion row per prediction threshold.

    Labels are binarized once, at label_threshold (default: the lowest swept
    threshold), so recall is non-increasing as the prediction threshold rises.
    """
    thresholds = list(thresholds)
    if thresholds != sorted(thresholds):
        raise ValueError("thresholds must be sorted ascending")
    if not thresholds:
        return []
    base = thresholds[0] if label_threshold is None else label_threshold
    label_flags = [l >= base for l in labels]
    rows = []
    for t in thresholds:
        _check_lengths(preds, labels)
        rows.append(_confusion([p >= t for p in preds], label_flags, t))
    return rows


def evaluate(preds, labels, thresholds=(0.75, 0.80)) -> EvalReport:
    return EvalReport(
        regression=regression_metrics(preds, labels),
        thresholds=tuple(threshold_sweep(preds, labels, list(thresholds))),
    )


def _fmt(value, pct=False) -> str:
    if value is None:
        return "undefined"
    return f"{value * 100:.1f}%" if pct else f"{value:.4f}"


def format_report(report: EvalReport) -> str:
    lines = [
        "Metric                Score",
        f"Pearson correlation   {_fmt(report.regression.pearson)}",
        f"MAE                   {_fmt(report.regression.mae)}",
        f"RMSE                  {_fmt(report.regression.rmse)}",
    ]
    for row in report.thresholds:
        lines.append(f"-- threshold {row.threshold:.2f} --")
        lines.append(f"Accuracy (binary)     {_fmt(row.accuracy, pct=True)}")
        lines.append(f"Precision             {_fmt(row.precision, pct=True)}")
        lines.append(f"Recall                {_fmt(row.recall, pct=True)}")
        lines.append(f"F1-score              {_fmt(row.f1, pct=True)}")
        lines.append(f"Confusion tp/fp/tn/fn {row.tp}/{row.fp}/{row.tn}/{row.fn}")
    return "\n".join(lines) + "\n"
