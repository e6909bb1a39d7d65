import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import anderson_ksamp
from sklearn.metrics import roc_auc_score

from botdetect import classify
from botdetect.evaluation import (
    BOTOMETER_THRESHOLD,
    ad_critical_value,
    anderson_darling_2sample,
    anderson_darling_ksample,
    auc,
    best_f1_threshold,
    confusion_metrics,
    f1_scan,
    kfold_cv,
    reports_to_csv_rows,
    reports_to_json,
    stratified_folds,
)
from botdetect.synthetic import blobs


def brute_auc(s, y):
    pos = [a for a, l in zip(s, y) if l]
    neg = [a for a, l in zip(s, y) if not l]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def brute_f1(s, y, t):
    r = confusion_metrics(s, y, t)
    return r.f1


BH = ["bot", "bot", "human", "human"]


@pytest.mark.parametrize(
    "scores, labels, expected",
    [((0.9, 0.8, 0.2, 0.1), BH, 1.0), ((0.9, 0.6, 0.4, 0.2), ["bot", "human", "bot", "human"], 0.75), ((0.5,) * 4, BH, 0.5)],
)
def test_auc_examples(backend, scores, labels, expected):
    assert auc(scores, labels, backend=backend) == expected


def test_auc_requires_both_classes():
    with pytest.raises(ValueError):
        auc([0.1, 0.2], ["bot", "bot"])


labelled = st.integers(2, 50).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 6).map(lambda v: v / 6), min_size=n, max_size=n),
        st.lists(st.booleans(), min_size=n, max_size=n).filter(lambda y: 0 < sum(y) < len(y)),
    )
)


@settings(max_examples=200, deadline=None)
@given(labelled)
def test_auc_brute_force_and_flip(backend, data):
    s, y = data
    a = auc(s, y, backend=backend)
    assert a == pytest.approx(brute_auc(s, y), abs=1e-12)
    assert a == pytest.approx(roc_auc_score(y, s), abs=1e-12)
    assert a + auc(s, [not v for v in y], backend=backend) == pytest.approx(1.0, abs=1e-12)


def test_perfect_threshold():
    r = confusion_metrics([0.9, 0.8, 0.2, 0.1], BH, 0.5)
    assert r.accuracy == 1.0 and r.f1 == 1.0 and r.auc == 1.0


def test_all_predicted_human():
    r = confusion_metrics([0.1, 0.2, 0.3], ["bot", "human", "bot"], 0.9)
    assert r.recall == 0.0 and r.f1 == 0.0 and r.precision == 0.0


def test_botometer_fixture():
    scores = [0.9, 0.35, 0.3, 0.1, 0.5, 0.2]
    labels = ["bot", "bot", "bot", "bot", "human", "human"]
    r = confusion_metrics(scores, labels, BOTOMETER_THRESHOLD)
    # 0.3 sits on the threshold and is predicted human
    assert (r.tp, r.fp, r.fn, r.tn) == (2, 1, 2, 1)
    assert r.precision == pytest.approx(2 / 3) and r.recall == 0.5
    assert r.specificity == 0.5 and r.accuracy == 0.5
    assert r.f1 == pytest.approx(4 / 7)
    assert r.n_pos == 4 and r.n_neg == 2


def test_single_class_auc_is_nan():
    assert np.isnan(confusion_metrics([0.1, 0.9], ["bot", "bot"], 0.5).auc)


def test_best_threshold_midpoint():
    t = best_f1_threshold([0.9, 0.8, 0.2, 0.1], BH)
    assert t == 0.5
    assert confusion_metrics([0.9, 0.8, 0.2, 0.1], BH, t).f1 == 1.0


@pytest.mark.parametrize("n_pos, n", [(1, 4), (3, 5), (2, 2 + 6)])
def test_identical_scores_predict_all_bot(n_pos, n):
    y = [1] * n_pos + [0] * (n - n_pos)
    t = best_f1_threshold([0.4] * n, y)
    assert t < 0.4
    p = n_pos / n
    assert confusion_metrics([0.4] * n, y, t).f1 == pytest.approx(2 * p / (p + 1))


def test_f1_scan_covers_every_split():
    s = [0.1, 0.4, 0.4, 0.7]
    y = [0, 1, 0, 1]
    thresholds, f1 = f1_scan(s, y)
    assert len(thresholds) == 4
    for t, f in zip(thresholds, f1):
        assert f == pytest.approx(brute_f1(s, y, t))


def test_f1_grid_oracle():
    rng = np.random.default_rng(0)
    grid = np.round(np.arange(0, 1.001, 0.001), 3)
    for _ in range(100):
        n = int(rng.integers(5, 60))
        s = np.round(rng.random(n), int(rng.integers(1, 4)))
        y = rng.integers(0, 2, n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        best = confusion_metrics(s, y, best_f1_threshold(s, y)).f1
        assert all(best >= confusion_metrics(s, y, g).f1 - 1e-15 for g in grid)


def test_stratified_folds_balanced():
    y = np.array([1] * 23 + [0] * 37)
    f = stratified_folds(y, 5, seed=1)
    for k in range(5):
        assert abs((f[y == 1] == k).sum() - 23 / 5) < 1
        assert abs((f[y == 0] == k).sum() - 37 / 5) < 1
    assert np.array_equal(f, stratified_folds(y, 5, seed=1))


def test_kfold_separable():
    X, y = blobs(200, 6.0, seed=42)
    assert kfold_cv(X, y, classify.make_spec("logistic_regression"), 5, seed=0) >= 0.99


def test_kfold_shuffled_labels_null():
    X, y = blobs(200, 6.0, seed=42)
    spec = classify.make_spec("logistic_regression")
    inside = 0
    for seed in range(20):
        yp = np.random.default_rng(seed).permutation(y)
        inside += 0.4 <= kfold_cv(X, yp, spec, 5, seed=seed) <= 0.6
    assert inside >= 19


def test_k_larger_than_minority():
    with pytest.raises(ValueError):
        stratified_folds([1, 1, 0, 0, 0, 0, 0], 5)


@pytest.mark.filterwarnings("ignore:p-value")
def test_ad_matches_scipy(backend):
    rng = np.random.default_rng(3)
    samples = [rng.integers(0, 20, n).astype(float) for n in (30, 45, 12)]
    ours = anderson_darling_ksample(samples, backend=backend)
    ref = anderson_ksamp(samples, midrank=True)
    assert ours.standardized == pytest.approx(ref.statistic, rel=1e-10)
    x, y = rng.normal(size=50), rng.normal(0.8, size=60)
    assert anderson_darling_2sample(x, y, backend=backend).standardized == pytest.approx(
        anderson_ksamp([x, y], midrank=True).statistic, rel=1e-10
    )


def test_ad_critical_value():
    assert ad_critical_value(2, 0.01) == pytest.approx(3.752, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_ad_symmetric_under_sample_order(seed):
    rng = np.random.default_rng(seed)
    samples = [rng.integers(0, 8, n).astype(float) for n in rng.integers(5, 30, 3)]
    base = anderson_darling_ksample(samples).statistic
    for perm in itertools.permutations(samples):
        assert anderson_darling_ksample(list(perm)).statistic == pytest.approx(base, rel=1e-12)


def test_ad_identical_samples_minimal():
    x = np.linspace(0, 1, 50)
    same = anderson_darling_2sample(x, x)
    assert not same.reject_at_1pct
    assert same.standardized < anderson_darling_2sample(x, x + 0.2).standardized


def test_ad_minimum_sizes():
    with pytest.raises(ValueError):
        anderson_darling_2sample([1, 2, 3], [1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        anderson_darling_ksample([[1, 2, 3, 4, 5]])


def test_report_serialisation():
    r = confusion_metrics([0.9, 0.8, 0.2, 0.1], BH, 0.5)
    rows = list(reports_to_csv_rows([("ds", "m", r)]))
    assert rows[0][:2] == ["dataset", "model_id"] and len(rows) == 2
    assert '"f1": 1.0' in reports_to_json([("ds", "m", r)])
