import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsad.evaluate import (
    box_whisker,
    paired_t_test,
    roc_auc,
    write_roc_csv,
    write_summary_csv,
)
from oracles import pairwise_auc_oracle


def test_perfect_separation_auc_one():
    ref = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    assert roc_auc(ref.astype(float), ref).auc == pytest.approx(1.0)


def test_inverted_scores_auc_zero():
    ref = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    assert roc_auc(1.0 - ref.astype(float), ref).auc == pytest.approx(0.0)


def test_worked_example_auc():
    scores = np.array([0.1, 0.4, 0.35, 0.8])
    labels = np.array([0, 0, 1, 1])
    # pairwise oracle: anomaly wins 3 of 4 pairs
    assert pairwise_auc_oracle(scores, labels) == pytest.approx(0.75)
    assert roc_auc(scores, labels).auc == pytest.approx(0.75, abs=1e-12)


def test_roc_curves_monotone(rng):
    scores = rng.uniform(0, 1, size=200)
    labels = (rng.uniform(size=200) < 0.2).astype(np.uint8)
    labels[:2] = 1
    labels[-2:] = 0
    roc = roc_auc(scores, labels)
    assert np.all(np.diff(roc.thresholds) >= 0)
    assert np.all(np.diff(roc.pd) <= 1e-15)
    assert np.all(np.diff(roc.pf) <= 1e-15)
    assert roc.pd[0] == 1.0 and roc.pf[0] == 1.0
    assert roc.pd[-1] == 0.0 and roc.pf[-1] == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_trapezoid_equals_pairwise_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 200))
    scores = np.round(rng.uniform(0, 1, size=n), 2)  # ties likely
    labels = (rng.uniform(size=n) < 0.3).astype(np.uint8)
    labels[0] = 1
    labels[1] = 0
    assert roc_auc(scores, labels).auc == pytest.approx(
        pairwise_auc_oracle(scores, labels), abs=1e-9
    )


def test_auc_complement_identity(rng):
    scores = rng.uniform(0, 1, size=150)
    labels = (rng.uniform(size=150) < 0.25).astype(np.uint8)
    labels[0] = 1
    labels[1] = 0
    forward = roc_auc(scores, labels).auc
    reverse = roc_auc(-scores, labels).auc
    assert forward + reverse == pytest.approx(1.0, abs=1e-9)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_auc_invariant_under_increasing_transform(seed):
    rng = np.random.default_rng(seed)
    scores = rng.uniform(0, 1, size=60)
    labels = (rng.uniform(size=60) < 0.3).astype(np.uint8)
    labels[0] = 1
    labels[1] = 0
    transformed = np.exp(3.0 * scores) + scores
    assert roc_auc(scores, labels).auc == pytest.approx(
        roc_auc(transformed, labels).auc, abs=1e-12
    )


def test_roc_rejects_single_class():
    with pytest.raises(ValueError):
        roc_auc(np.ones(4), np.ones(4, dtype=np.uint8))
    with pytest.raises(ValueError):
        roc_auc(np.ones(4), np.zeros(4, dtype=np.uint8))


# ---------------------------------------------------------------------------
# box whisker


def test_box_whisker_trim_example():
    scores = np.array([1, 2, 3, 4, 5, 6, 7, 8], dtype=float)
    labels = np.ones(8, dtype=np.uint8)
    labels = np.concatenate([labels, np.zeros(4, dtype=np.uint8)])
    scores = np.concatenate([scores, np.array([0.0, 0.0, 0.0, 0.0])])
    anomaly, _ = box_whisker(scores, labels)
    assert anomaly.minimum == 3.0
    assert anomaly.maximum == 6.0
    assert anomaly.median == pytest.approx(4.5)


def test_box_whisker_constant_class():
    scores = np.array([0.5, 0.5, 0.5, 0.1, 0.2])
    labels = np.array([1, 1, 1, 0, 0], dtype=np.uint8)
    anomaly, _ = box_whisker(scores, labels)
    assert anomaly.minimum == anomaly.median == anomaly.maximum == 0.5


def test_box_whisker_separated_classes(rng):
    anomaly_scores = rng.uniform(0.7, 1.0, size=40)
    background_scores = rng.uniform(0.0, 0.3, size=160)
    scores = np.concatenate([anomaly_scores, background_scores])
    labels = np.concatenate([np.ones(40, dtype=np.uint8), np.zeros(160, dtype=np.uint8)])
    anomaly, background = box_whisker(scores, labels)
    assert anomaly.minimum > background.maximum


# ---------------------------------------------------------------------------
# paired t-test


def test_t_test_identical_lists_degenerate():
    a = [0.9, 0.8, 0.95]
    with pytest.raises(ValueError):
        paired_t_test(a, a)


def test_t_test_constant_difference_degenerate():
    a = np.array([0.9, 0.8, 0.95])
    with pytest.raises(ValueError):
        paired_t_test(a, a - 0.01)


def test_t_test_formula_oracle():
    diffs = np.array([0.01, 0.02, 0.015, 0.012, 0.018, 0.02, 0.011, 0.014])
    b = np.full(8, 0.95)
    a = b + diffs
    result = paired_t_test(a, b)
    n = diffs.size
    expected = diffs.mean() / (diffs.std(ddof=1) / np.sqrt(n))
    assert result.statistic == pytest.approx(expected, abs=1e-9)
    assert result.dof == 7
    assert result.reject  # mean ~0.015 against sd ~0.004: clearly significant


def test_t_test_insignificant_difference(rng):
    a = rng.uniform(0, 1, size=10)
    b = a + rng.normal(0, 0.2, size=10) - 0.001
    result = paired_t_test(a, b)
    assert isinstance(result.reject, bool)
    assert result.critical > 0


def test_t_test_validates_input():
    with pytest.raises(ValueError):
        paired_t_test([1.0], [0.5])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 0.5], [0.5])


# ---------------------------------------------------------------------------
# CSV emission


def test_csv_outputs(tmp_path, rng):
    scores = rng.uniform(0, 1, size=50)
    labels = (rng.uniform(size=50) < 0.3).astype(np.uint8)
    labels[0] = 1
    labels[1] = 0
    roc = roc_auc(scores, labels)
    roc_path = str(tmp_path / "roc.csv")
    write_roc_csv(roc, roc_path)
    with open(roc_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["threshold", "pf", "pd"]
    assert len(rows) == 1 + roc.thresholds.size
    assert float(rows[1][1]) == 1.0 and float(rows[1][2]) == 1.0

    summary_path = str(tmp_path / "summary.csv")
    write_summary_csv({"scene": roc.auc}, summary_path)
    with open(summary_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["dataset", "auc"]
    assert rows[1][0] == "scene"
    assert float(rows[1][1]) == pytest.approx(roc.auc)
