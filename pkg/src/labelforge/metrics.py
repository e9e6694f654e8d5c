"""Pixel-level quality metrics over confusion counts.

All five metrics are plain ratios in [0, 1]:

    accuracy  = (tp + tn) / (tp + tn + fp + fn)
    precision = tp / (tp + fp)
    recall    = tp / (tp + fn)
    f1        = 2 * precision * recall / (precision + recall)
    iou       = tp / (tp + fp + fn)

A ratio whose denominator is 0 is reported as 0.0, except the degenerate
all-background case tp + fp + fn == 0 where every metric is 1.0 (an empty
prediction of an empty ground truth is a perfect prediction; this matches
the mask-level convention that two empty masks have IoU 1.0).

f1 and iou are algebraically locked together: f1 == 2 * iou / (1 + iou).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import EmptyInput
from .mask import ConfusionCounts

__all__ = [
    "MetricReport",
    "compute_metrics",
    "aggregate_global",
    "aggregate_per_image_mean",
    "report_to_json",
    "format_percent_table",
]

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "iou")


@dataclass(frozen=True)
class MetricReport:
    """Five quality ratios, optionally with the counts they came from.

    source_counts is None for reports that are means of other reports and
    therefore have no single confusion matrix behind them.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    iou: float
    source_counts: Optional[ConfusionCounts] = None

    def __post_init__(self) -> None:
        for name in METRIC_NAMES:
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} out of range [0, 1]: {v}")


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def compute_metrics(c: ConfusionCounts) -> MetricReport:
    """Derive the five metrics from one confusion matrix."""
    if c.total == 0:
        raise EmptyInput("confusion counts are all zero")
    if c.tp + c.fp + c.fn == 0:
        # nothing to find and nothing predicted: perfect by convention
        return MetricReport(1.0, 1.0, 1.0, 1.0, 1.0, source_counts=c)
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    f1 = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)
    return MetricReport(
        accuracy=_ratio(c.tp + c.tn, c.total),
        precision=precision,
        recall=recall,
        f1=f1,
        iou=_ratio(c.tp, c.tp + c.fp + c.fn),
        source_counts=c,
    )


def aggregate_global(counts: Iterable[ConfusionCounts]) -> MetricReport:
    """Sum confusion counts over a dataset, then compute metrics once.

    This is the primary aggregation: each pixel in the dataset carries the
    same weight regardless of which image holds it.
    """
    total = ConfusionCounts(0, 0, 0, 0)
    n = 0
    for c in counts:
        total = total + c
        n += 1
    if n == 0:
        raise EmptyInput("no confusion counts to aggregate")
    return compute_metrics(total)


def aggregate_per_image_mean(reports: Sequence[MetricReport]) -> MetricReport:
    """Unweighted mean of per-image reports (diagnostic view).

    The result has no source_counts: a mean of ratios does not correspond
    to any single confusion matrix.
    """
    if not reports:
        raise EmptyInput("no reports to average")
    n = len(reports)
    return MetricReport(
        accuracy=sum(r.accuracy for r in reports) / n,
        precision=sum(r.precision for r in reports) / n,
        recall=sum(r.recall for r in reports) / n,
        f1=sum(r.f1 for r in reports) / n,
        iou=sum(r.iou for r in reports) / n,
        source_counts=None,
    )


def report_to_json(report: MetricReport) -> dict:
    """Canonical JSON object for a report; ratios, not percentages."""
    obj: dict = {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "miou": report.iou,
    }
    if report.source_counts is not None:
        c = report.source_counts
        obj["counts"] = {"tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn}
    return obj


def format_percent_table(report: MetricReport) -> str:
    """Human-readable table, percentages with 2 decimals."""
    rows = [
        ("accuracy", report.accuracy),
        ("precision", report.precision),
        ("recall", report.recall),
        ("f1", report.f1),
        ("miou", report.iou),
    ]
    return "\n".join(f"{name:<9} {value * 100.0:6.2f}" for name, value in rows)
