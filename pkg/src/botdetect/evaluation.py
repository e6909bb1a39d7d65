"""Metrics, F1-maximising thresholds, stratified k-fold CV and the
tie-corrected k-sample Anderson-Darling test."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels

BOTOMETER_THRESHOLD = 0.3

# Scholz & Stephens (1987) interpolation coefficients for the standardized
# statistic's upper critical values: crit = b0 + b1/sqrt(m) + b2/m, m = k - 1.
AD_SIGNIFICANCE = (0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001)
_AD_B0 = (0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085)
_AD_B1 = (-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615)
_AD_B2 = (-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154)


def _positive_mask(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.dtype.kind in "US" or y.dtype == object:
        return y == "bot"
    return y.astype(bool)


def _both_classes(pos: np.ndarray) -> None:
    if pos.size == 0 or pos.all() or not pos.any():
        raise ValueError("both classes (bot and human) must be present")


def auc(scores, labels, backend=None) -> float:
    """Mann-Whitney AUC with midranks: P(bot > human) + 0.5 P(tie)."""
    s = np.asarray(scores, dtype=np.float64)
    pos = _positive_mask(labels)
    if s.shape != pos.shape:
        raise ValueError("scores and labels differ in length")
    _both_classes(pos)
    return kernels.midrank_auc(s, pos, backend=backend)


@dataclass(frozen=True)
class MetricReport:
    auc: float
    f1: float
    accuracy: float
    recall: float
    precision: float
    specificity: float
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n_pos(self) -> int:
        return self.tp + self.fn

    @property
    def n_neg(self) -> int:
        return self.tn + self.fp

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_pos"] = self.n_pos
        d["n_neg"] = self.n_neg
        return d


def _ratio(a, b) -> float:
    return a / b if b else 0.0


def f1_from_counts(tp, fp, fn) -> float:
    return _ratio(2 * tp, 2 * tp + fp + fn)


def confusion_metrics(scores, labels, threshold: float) -> MetricReport:
    """Predict bot iff ``score > threshold``. AUC is NaN when a class is absent."""
    s = np.asarray(scores, dtype=np.float64)
    pos = _positive_mask(labels)
    pred = s > threshold
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    try:
        a = auc(s, pos)
    except ValueError:
        a = float("nan")
    return MetricReport(
        auc=a,
        f1=f1_from_counts(tp, fp, fn),
        accuracy=_ratio(tp + tn, tp + tn + fp + fn),
        recall=recall,
        precision=precision,
        specificity=_ratio(tn, tn + fp),
        threshold=float(threshold),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


def f1_scan(scores, labels):
    """Candidate thresholds (ascending) and the F1 each achieves.

    Candidates: just below the smallest score, midpoints between consecutive
    distinct scores, and the largest score. Together they realise every
    distinct split of the sorted scores.
    """
    s = np.asarray(scores, dtype=np.float64)
    pos = _positive_mask(labels)
    _both_classes(pos)
    values, inverse = np.unique(s, return_inverse=True)
    pos_at = np.bincount(inverse, weights=pos, minlength=values.size)
    neg_at = np.bincount(inverse, weights=~pos, minlength=values.size)
    mids = (values[:-1] + values[1:]) / 2.0
    # adjacent doubles can round the midpoint up onto the upper value
    mids = np.where(mids >= values[1:], values[:-1], mids)
    thresholds = np.concatenate([[np.nextafter(values[0], -np.inf)], mids, [values[-1]]])
    # threshold i predicts bot for distinct values i.. (suffix sums)
    tp = np.concatenate([np.cumsum(pos_at[::-1])[::-1], [0.0]])
    fp = np.concatenate([np.cumsum(neg_at[::-1])[::-1], [0.0]])
    fn = pos.sum() - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    return thresholds, f1


def best_f1_threshold(scores, labels) -> float:
    """F1-maximising threshold; the lowest one wins ties."""
    thresholds, f1 = f1_scan(scores, labels)
    return float(thresholds[int(np.argmax(f1))])


def stratified_folds(labels, k: int = 5, seed: int = 0) -> np.ndarray:
    """Fold index per row; each class is shuffled and dealt round-robin."""
    pos = _positive_mask(labels)
    rng = np.random.default_rng(seed)
    folds = np.empty(pos.shape[0], dtype=np.int64)
    for cls in (True, False):
        idx = np.flatnonzero(pos == cls)
        if idx.size < k:
            raise ValueError(f"class has {idx.size} rows, fewer than k={k} folds")
        idx = rng.permutation(idx)
        folds[idx] = np.arange(idx.size) % k
    return folds


def kfold_cv(X, y, spec, k: int = 5, seed: int = 0) -> float:
    from .classify import encode_labels, fit, score

    X = np.asarray(X, dtype=np.float64)
    y = encode_labels(y)
    folds = stratified_folds(y, k, seed)
    aucs = []
    for f in range(k):
        test = folds == f
        model = fit(spec, X[~test], y[~test])
        aucs.append(auc(score(model, X[test]), y[test]))
    return float(np.mean(aucs))


# -- Anderson-Darling -----------------------------------------------------------


@dataclass(frozen=True)
class AdTestResult:
    statistic: float
    standardized: float
    critical_1pct: float
    reject_at_1pct: bool

    def to_dict(self) -> dict:
        return asdict(self)


def ad_critical_value(k: int, significance: float) -> float:
    m = k - 1
    i = AD_SIGNIFICANCE.index(significance)
    return _AD_B0[i] + _AD_B1[i] / math.sqrt(m) + _AD_B2[i] / m


def _ad_variance(sizes, n_total: int) -> float:
    k = len(sizes)
    N = n_total
    H = sum(1.0 / n for n in sizes)
    inv = 1.0 / np.arange(1, N, dtype=np.float64)  # 1/1 .. 1/(N-1)
    h = float(inv.sum())
    # g = sum_{i=1}^{N-2} sum_{j=i+1}^{N-1} 1 / ((N - i) j)
    tail = np.cumsum(inv[::-1])[::-1]  # tail[i-1] = sum_{j>=i} 1/j
    i = np.arange(1, N - 1, dtype=np.float64)
    g = float(np.sum(tail[1 : N - 1] / (N - i)))
    a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * H
    b = (2 * g - 4) * k**2 + 8 * h * k + (2 * g - 14 * h - 4) * H - 8 * h + 4 * g - 6
    c = (6 * h + 2 * g - 2) * k**2 + (4 * h - 4 * g + 6) * k + (2 * h - 6) * H + 4 * h
    d = (2 * h + 6) * k**2 - 4 * h * k
    return (a * N**3 + b * N**2 + c * N + d) / ((N - 1.0) * (N - 2.0) * (N - 3.0))


def anderson_darling_ksample(samples, min_size: int = 5, backend=None) -> AdTestResult:
    samples = [np.asarray(s, dtype=np.float64).ravel() for s in samples]
    k = len(samples)
    if k < 2:
        raise ValueError("need at least two samples")
    if any(s.size < min_size for s in samples):
        raise ValueError(f"each sample needs at least {min_size} observations")
    N = sum(s.size for s in samples)
    inner = kernels.ad_midrank_sum(samples, backend=backend)
    stat = (N - 1.0) / N**2 * inner
    sigma = math.sqrt(_ad_variance([s.size for s in samples], N))
    standardized = (stat - (k - 1)) / sigma
    crit = ad_critical_value(k, 0.01)
    return AdTestResult(stat, standardized, crit, bool(standardized > crit))


def anderson_darling_2sample(x, y, backend=None) -> AdTestResult:
    return anderson_darling_ksample([x, y], backend=backend)


def reports_to_json(rows) -> str:
    """``rows``: iterable of (dataset, model_id, MetricReport)."""
    out = [{"dataset": d, "model_id": m, **r.to_dict()} for d, m, r in rows]
    return json.dumps(out, indent=2, sort_keys=True)


REPORT_COLUMNS = (
    "dataset", "model_id", "threshold", "auc", "f1", "accuracy", "recall",
    "precision", "specificity", "tp", "fp", "tn", "fn", "n_pos", "n_neg",
)


def reports_to_csv_rows(rows):
    yield list(REPORT_COLUMNS)
    for d, m, r in rows:
        rec = {"dataset": d, "model_id": m, **r.to_dict()}
        yield [rec[c] for c in REPORT_COLUMNS]
