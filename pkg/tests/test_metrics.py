import numpy as np
import pytest

from rfdiag.dataset import LabelVector
from rfdiag.metrics import (
    ComponentMetrics,
    ConfusionCounts,
    component_report,
    compute_metrics,
    confusion,
    write_metrics_csv,
)


def test_perfect_predictions_have_no_errors():
    rng = np.random.default_rng(0)
    labels = (rng.uniform(size=(50, 4)) < 0.5).astype(np.uint8)
    counts = confusion(labels, labels)
    for name, c in counts.items():
        assert c.fp == 0 and c.fn == 0
        assert c.total == 50


def test_single_sample_tally():
    counts = confusion([LabelVector(1, 0, 0, 0)], [LabelVector(0, 0, 0, 0)])
    assert counts["filter"] == ConfusionCounts(tp=0, tn=0, fp=1, fn=0)
    for name in ("ps", "lo", "mixer"):
        assert counts[name] == ConfusionCounts(tp=0, tn=1, fp=0, fn=0)


def test_counts_match_bruteforce_tally():
    rng = np.random.default_rng(7)
    pred = (rng.uniform(size=(1000, 4)) < 0.5).astype(np.uint8)
    true = (rng.uniform(size=(1000, 4)) < 0.5).astype(np.uint8)
    counts = confusion(pred, true)
    for k, name in enumerate(("filter", "ps", "lo", "mixer")):
        tp = tn = fp = fn = 0
        for i in range(1000):
            p, t = pred[i, k], true[i, k]
            if p and t:
                tp += 1
            elif not p and not t:
                tn += 1
            elif p and not t:
                fp += 1
            else:
                fn += 1
        assert counts[name] == ConfusionCounts(tp, tn, fp, fn)
        assert counts[name].total == 1000


def test_confusion_validation():
    ok = [LabelVector(0, 0, 0, 0)]
    with pytest.raises(ValueError):
        confusion(ok, ok + ok)
    with pytest.raises(ValueError):
        confusion([], [])


def test_metrics_formulas():
    m = compute_metrics(ConfusionCounts(tp=50, tn=40, fp=5, fn=5))
    np.testing.assert_allclose(m.accuracy, 0.9, atol=1e-4)
    np.testing.assert_allclose(m.precision, 0.9091, atol=1e-4)
    np.testing.assert_allclose(m.recall, 0.9091, atol=1e-4)
    np.testing.assert_allclose(m.f1, 0.9091, atol=1e-4)


def test_all_correct_is_all_ones():
    m = compute_metrics(ConfusionCounts(tp=3, tn=7, fp=0, fn=0))
    assert m == ComponentMetrics(1.0, 1.0, 1.0, 1.0)


def test_degenerate_denominators_are_undefined():
    m = compute_metrics(ConfusionCounts(tp=0, tn=10, fp=0, fn=0))
    assert m.accuracy == 1.0
    assert m.precision is None and m.recall is None and m.f1 is None


def test_empty_table_rejected():
    with pytest.raises(ValueError):
        compute_metrics(ConfusionCounts(0, 0, 0, 0))
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 0, 0, 0)


def test_f1_below_arithmetic_mean():
    rng = np.random.default_rng(3)
    for _ in range(200):
        tp, tn, fp, fn = rng.integers(0, 30, size=4)
        if tp + tn + fp + fn == 0:
            continue
        m = compute_metrics(ConfusionCounts(int(tp), int(tn), int(fp), int(fn)))
        assert m.accuracy == (tp + tn) / (tp + tn + fp + fn)
        if m.f1 is not None:
            assert m.f1 <= (m.precision + m.recall) / 2 + 1e-12


def test_permutation_invariance():
    rng = np.random.default_rng(5)
    pred = (rng.uniform(size=(64, 4)) < 0.5).astype(np.uint8)
    true = (rng.uniform(size=(64, 4)) < 0.5).astype(np.uint8)
    perm = rng.permutation(64)
    assert confusion(pred, true) == confusion(pred[perm], true[perm])


def test_csv_layout(tmp_path):
    pred = np.array([[1, 0, 1, 0], [0, 0, 1, 1], [1, 1, 0, 0]], dtype=np.uint8)
    true = np.array([[1, 0, 1, 0], [0, 1, 1, 1], [0, 1, 0, 0]], dtype=np.uint8)
    report = component_report(pred, true)
    path = tmp_path / "metrics.csv"
    write_metrics_csv(report, path, tier="high")
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "tier,component,accuracy,precision,recall,f1"
    assert [ln.split(",")[1] for ln in lines[1:]] == ["filter", "mixer", "lo", "ps"]
    assert all(ln.startswith("high,") for ln in lines[1:])
    # three-decimal cells, NA for undefined
    for ln in lines[1:]:
        for cell in ln.split(",")[2:]:
            assert cell == "NA" or len(cell.split(".")[1]) == 3


def test_csv_marks_undefined_as_na(tmp_path):
    pred = np.zeros((4, 4), dtype=np.uint8)
    true = np.zeros((4, 4), dtype=np.uint8)
    report = component_report(pred, true)
    path = tmp_path / "na.csv"
    write_metrics_csv(report, path, tier="low")
    for ln in path.read_text().strip().splitlines()[1:]:
        assert ln.split(",")[3:] == ["NA", "NA", "NA"]
