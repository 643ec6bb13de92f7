"""Per-component confusion tallies and accuracy/precision/recall/F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import COMPONENTS, LabelVector

# Row order used in reports and CSVs.
REPORT_ORDER = ("filter", "mixer", "lo", "ps")


@dataclass(frozen=True)
class ConfusionCounts:
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
class ComponentMetrics:
    """Metric values in [0, 1]; None marks an undefined (0/0) metric."""

    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None


def _as_label_matrix(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        arr = values
    else:
        arr = np.array([v.to_array() if isinstance(v, LabelVector) else v for v in values])
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.shape[1] != len(COMPONENTS):
        raise ValueError(f"expected an (n, {len(COMPONENTS)}) label array, got shape {arr.shape}")
    return arr.astype(bool)


def confusion(predictions, truths) -> dict[str, ConfusionCounts]:
    """Per-component confusion counts over paired label sequences."""
    pred = _as_label_matrix(predictions)
    true = _as_label_matrix(truths)
    if pred.shape[0] != true.shape[0]:
        raise ValueError(f"{pred.shape[0]} predictions vs {true.shape[0]} truths")
    if pred.shape[0] == 0:
        raise ValueError("no samples to tally")
    out = {}
    for k, name in enumerate(COMPONENTS):
        p, t = pred[:, k], true[:, k]
        out[name] = ConfusionCounts(
            tp=int(np.sum(p & t)),
            tn=int(np.sum(~p & ~t)),
            fp=int(np.sum(p & ~t)),
            fn=int(np.sum(~p & t)),
        )
    return out


def compute_metrics(counts: ConfusionCounts) -> ComponentMetrics:
    """Accuracy, precision, recall, F1 from one confusion table.

    Precision is undefined (None) when tp+fp = 0, recall when tp+fn = 0, and
    F1 when either is; F1 is 0 when precision and recall are both zero.
    """
    if counts.total == 0:
        raise ValueError("empty confusion table")
    accuracy = (counts.tp + counts.tn) / counts.total
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else None
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return ComponentMetrics(accuracy, precision, recall, f1)


def component_report(predictions, truths) -> dict[str, ComponentMetrics]:
    return {name: compute_metrics(c) for name, c in confusion(predictions, truths).items()}


def write_metrics_csv(report: dict[str, ComponentMetrics], path, tier: str) -> None:
    """One data row per component in REPORT_ORDER; values to 3 decimals,
    undefined metrics written as NA."""

    def fmt(value) -> str:
        return "NA" if value is None else f"{value:.3f}"

    with open(path, "w") as f:
        f.write("tier,component,accuracy,precision,recall,f1\n")
        for name in REPORT_ORDER:
            m = report[name]
            f.write(f"{tier},{name},{fmt(m.accuracy)},{fmt(m.precision)},"
                    f"{fmt(m.recall)},{fmt(m.f1)}\n")
