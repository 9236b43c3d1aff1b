"""Binary classification metrics with Botnet (1) as the positive class.

A metric whose denominator is zero is reported as ``None`` rather than 0.
"""

from dataclasses import asdict, dataclass

import numpy as np

METRIC_NAMES = ("sensitivity", "specificity", "balanced_accuracy", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self):
        """The same outcomes with the other class treated as positive."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class MetricsRecord:
    sensitivity: float | None
    specificity: float | None
    balanced_accuracy: float | None
    f1: float | None

    def to_dict(self):
        return asdict(self)


def confusion(labels, predictions, positive=1):
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape:
        raise ValueError(f"length mismatch: {labels.shape[0]} labels vs {predictions.shape[0]} predictions")
    if labels.shape[0] < 1:
        raise ValueError("confusion matrix needs at least one row")
    true_pos = labels == positive
    pred_pos = predictions == positive
    return ConfusionMatrix(
        tp=int(np.sum(true_pos & pred_pos)),
        fp=int(np.sum(~true_pos & pred_pos)),
        tn=int(np.sum(~true_pos & ~pred_pos)),
        fn=int(np.sum(true_pos & ~pred_pos)),
    )


def _ratio(num, den):
    return num / den if den else None


def compute_metrics(cm):
    sens = _ratio(cm.tp, cm.tp + cm.fn)
    spec = _ratio(cm.tn, cm.tn + cm.fp)
    ba = None if sens is None or spec is None else (sens + spec) / 2
    f1 = _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)
    return MetricsRecord(sens, spec, ba, f1)


def balanced_accuracy(labels, predictions):
    return compute_metrics(confusion(labels, predictions)).balanced_accuracy
