import numpy as np
import pytest

from splitlab.metrics import ConfusionMatrix, balanced_accuracy, compute_metrics, confusion

import oracles

B, N = 1, 0


def test_confusion_examples():
    assert confusion([B, B, N, N], [B, N, N, B]) == ConfusionMatrix(tp=1, fp=1, tn=1, fn=1)
    cm = confusion([B, N, N, B, N], [B, N, N, B, N])
    assert cm.fp == cm.fn == 0 and cm.total == 5
    assert confusion([B, N], [B, B]) == ConfusionMatrix(tp=1, fp=1, tn=0, fn=0)


def test_confusion_errors():
    with pytest.raises(ValueError, match="mismatch"):
        confusion([1, 0], [1])
    with pytest.raises(ValueError):
        confusion([], [])


def test_metric_examples():
    m = compute_metrics(ConfusionMatrix(tp=9, fp=2, tn=8, fn=1))
    assert m.sensitivity == pytest.approx(0.9)
    assert m.specificity == pytest.approx(0.8)
    assert m.balanced_accuracy == pytest.approx(0.85)
    assert m.f1 == pytest.approx(18 / 21)

    perfect = compute_metrics(ConfusionMatrix(tp=10, fp=0, tn=10, fn=0))
    assert perfect.to_dict() == {"sensitivity": 1.0, "specificity": 1.0,
                                 "balanced_accuracy": 1.0, "f1": 1.0}

    no_pos = compute_metrics(ConfusionMatrix(tp=0, fp=3, tn=7, fn=0))
    assert no_pos.sensitivity is None and no_pos.balanced_accuracy is None
    assert no_pos.specificity == pytest.approx(0.7)
    assert no_pos.f1 == 0.0

    assert compute_metrics(ConfusionMatrix(0, 0, 5, 0)).f1 is None


def test_against_counting_oracle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        labels = (rng.random(n) < rng.random()).astype(int)
        preds = (rng.random(n) < rng.random()).astype(int)
        counts, expected = oracles.count_metrics(labels.tolist(), preds.tolist())
        cm = confusion(labels, preds)
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == counts
        got = compute_metrics(cm)
        for value, want in zip((got.sensitivity, got.specificity, got.balanced_accuracy, got.f1), expected):
            if want is None:
                assert value is None
            else:
                assert value == pytest.approx(want, abs=1e-12)
                assert 0.0 <= value <= 1.0


def test_swapping_positive_class():
    rng = np.random.default_rng(1)
    for _ in range(200):
        labels = rng.integers(0, 2, 30)
        preds = rng.integers(0, 2, 30)
        cm = confusion(labels, preds)
        assert confusion(labels, preds, positive=0) == cm.swapped()
        a, b = compute_metrics(cm), compute_metrics(cm.swapped())
        assert a.sensitivity == b.specificity and a.specificity == b.sensitivity
        if a.balanced_accuracy is not None:
            assert a.balanced_accuracy == pytest.approx(b.balanced_accuracy)


@pytest.mark.parametrize("constant", [0, 1])
def test_constant_predictor_has_half_balanced_accuracy(constant):
    labels = np.random.default_rng(2).permutation(np.r_[np.ones(37, int), np.zeros(5, int)])
    assert balanced_accuracy(labels, np.full(labels.size, constant)) == 0.5
