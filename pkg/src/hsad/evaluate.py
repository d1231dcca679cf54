"""Detection scoring: ROC/AUC, trimmed class summaries, paired t-test."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t


@dataclass
class RocResult:
    thresholds: np.ndarray  # ascending
    pd: np.ndarray  # detection probability per threshold
    pf: np.ndarray  # false-alarm probability per threshold
    auc: float


def _split_classes(scores: np.ndarray, reference: np.ndarray):
    s = np.asarray(scores, dtype=np.float64).ravel()
    r = np.asarray(reference).ravel()
    if s.shape != r.shape:
        raise ValueError(f"scores shape {scores.shape} != reference shape {reference.shape}")
    anomaly = s[r != 0]
    background = s[r == 0]
    if anomaly.size == 0 or background.size == 0:
        raise ValueError("reference must contain both classes")
    return anomaly, background


def roc_auc(scores: np.ndarray, reference: np.ndarray) -> RocResult:
    """Threshold sweep over the unique scores with trapezoidal integration.

    Detection at threshold tau means score >= tau. The resulting AUC equals
    the Mann-Whitney rank statistic with ties counted as half wins.
    """
    anomaly, background = _split_classes(scores, reference)
    uniq = np.unique(np.concatenate([anomaly, background]))
    thresholds = np.concatenate([[-np.inf], uniq, [np.inf]])
    # searchsorted('left') counts values >= tau in a sorted array
    a_sorted = np.sort(anomaly)
    b_sorted = np.sort(background)
    pd = 1.0 - np.searchsorted(a_sorted, thresholds, side="left") / anomaly.size
    pf = 1.0 - np.searchsorted(b_sorted, thresholds, side="left") / background.size
    auc = float(np.trapezoid(pd[::-1], pf[::-1]))
    return RocResult(thresholds=thresholds, pd=pd, pf=pf, auc=auc)


@dataclass
class TrimmedSummary:
    minimum: float
    median: float
    maximum: float


def _trim(values: np.ndarray) -> np.ndarray:
    s = np.sort(values)
    k = s.size // 4
    return s[k : s.size - k]


def box_whisker(scores: np.ndarray, reference: np.ndarray):
    """Interquartile-trimmed (min, median, max) per class.

    The top and bottom quarter of each class are discarded (nearest-rank
    count) before summarizing. Returns (anomaly, background) summaries.
    """
    anomaly, background = _split_classes(scores, reference)
    out = []
    for values in (anomaly, background):
        kept = _trim(values)
        out.append(
            TrimmedSummary(float(kept.min()), float(np.median(kept)), float(kept.max()))
        )
    return tuple(out)


@dataclass
class TTestResult:
    statistic: float
    dof: int
    critical: float
    reject: bool


def paired_t_test(a, b, significance: float = 0.05) -> TTestResult:
    """Two-sided paired t-test on AUC lists."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired t-test needs two equal-length 1-d score lists")
    n = a.size
    if n < 2:
        raise ValueError("paired t-test needs at least two pairs")
    diff = a - b
    sd = diff.std(ddof=1)
    if sd == 0.0:
        raise ValueError("zero variance in paired differences; t is undefined")
    statistic = float(diff.mean() / (sd / np.sqrt(n)))
    critical = float(student_t.ppf(1.0 - significance / 2.0, n - 1))
    return TTestResult(statistic, n - 1, critical, abs(statistic) > critical)


def write_roc_csv(roc: RocResult, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "pf", "pd"])
        for tau, pf, pd in zip(roc.thresholds, roc.pf, roc.pd):
            writer.writerow([repr(float(tau)), repr(float(pf)), repr(float(pd))])


def write_summary_csv(rows: dict, path: str) -> None:
    """One (dataset, auc) row per entry."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "auc"])
        for name, auc in rows.items():
            writer.writerow([name, repr(float(auc))])
