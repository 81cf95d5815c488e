import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ingb.dataset import Dataset, stratified_folds
from ingb.errors import ContractError
from ingb.evaluation import (METRICS, ConfusionCounts, MetricsReport, bench, compute_metrics,
                             cross_validate, fit_logistic, knn_predict, logistic_loss_and_grad,
                             logreg_fit_predict)

from conftest import make_dataset


def test_knn_exact_match_k1():
    d = make_dataset([[0, 0], [1, 1], [5, 5]], [0, 1, 1])
    assert knn_predict(d, [[1, 1]], k=1).tolist() == [1]


def test_knn_surrounded():
    X = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [9, 9], [9, 8]]
    d = make_dataset(X, [0, 0, 0, 0, 0, 1, 1])
    assert knn_predict(d, [[0, 0]], k=5).tolist() == [0]


def test_knn_tie_goes_to_nearest_class():
    d = make_dataset([[0.0], [1.1], [-1.2], [1.3]], [1, 0, 0, 1])
    # votes 2-2, nearest neighbour of 0.0 is itself (class 1)
    assert knn_predict(d, [[0.0]], k=4).tolist() == [1]


def test_knn_empty_train():
    d = Dataset(np.zeros((0, 2)), np.zeros(0, int), ["a", "b"])
    with pytest.raises(ContractError):
        knn_predict(d, [[0, 0]])


def test_knn_deterministic():
    rng = np.random.default_rng(0)
    d = make_dataset(rng.normal(size=(50, 2)), rng.integers(0, 2, 50))
    q = rng.normal(size=(20, 2))
    assert knn_predict(d, q).tolist() == knn_predict(d, q).tolist()


def test_logreg_separable_1d():
    d = make_dataset([[0.0]] * 5 + [[1.0]] * 5, [0] * 5 + [1] * 5)
    assert logreg_fit_predict(d, d.features).tolist() == d.labels.tolist()


def test_logreg_useless_symmetric_feature():
    # feature 0 is informative but noisy, feature 1 carries no label signal;
    # the problem is strictly convex with a finite optimum at w[1] = 0
    X, y = [], []
    for x0, labels in ((0.0, [0, 0, 0, 1]), (1.0, [1, 1, 1, 0])):
        for x1 in (0.0, 1.0):
            for lab in labels:
                X.append([x0, x1])
                y.append(lab)
    w, _ = fit_logistic(np.array(X), np.array(y, dtype=float), epochs=5000, lr=1.0)
    assert abs(w[1]) < 1e-4
    assert w[0] == pytest.approx(2 * math.log(3), rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_logistic_gradient_finite_difference(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 3))
    y = (rng.random(12) < 0.5).astype(float)
    w = rng.normal(size=3)
    b = float(rng.normal())
    _, gw, gb = logistic_loss_and_grad(w, b, X, y)
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        num = (logistic_loss_and_grad(w + e, b, X, y)[0]
               - logistic_loss_and_grad(w - e, b, X, y)[0]) / (2 * h)
        assert num == pytest.approx(gw[j], rel=1e-5, abs=1e-8)
    num_b = (logistic_loss_and_grad(w, b + h, X, y)[0]
             - logistic_loss_and_grad(w, b - h, X, y)[0]) / (2 * h)
    assert num_b == pytest.approx(gb, rel=1e-5, abs=1e-8)


def test_logreg_multiclass():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(c, 0.2, size=(20, 2)) for c in ([0, 0], [4, 0], [0, 4])])
    d = make_dataset(X, np.repeat([0, 1, 2], 20))
    assert (logreg_fit_predict(d, X) == d.labels).mean() > 0.95


def test_metrics_hand_example():
    truth = np.array([1] * 10 + [0] * 100)
    pred = np.array([1] * 8 + [0] * 2 + [0] * 90 + [1] * 10)
    r = compute_metrics(truth, pred, positive_class=1)
    assert r.recall == pytest.approx(0.8, abs=1e-12)
    assert r.specificity == pytest.approx(0.9, abs=1e-12)
    assert r.precision == pytest.approx(8 / 18, abs=1e-12)
    assert r.f1 == pytest.approx(2 * 0.8 * (8 / 18) / (0.8 + 8 / 18), abs=1e-12)
    assert r.f1 == pytest.approx(0.5714, abs=1e-4)
    assert r.auc_balanced == pytest.approx(0.85, abs=1e-12)
    assert r.g_mean == pytest.approx(math.sqrt(0.72), abs=1e-12)


def test_metrics_perfect():
    t = np.array([0, 1, 1, 0, 2])
    r = compute_metrics(t, t)
    assert all(v == 1.0 for v in r.values().values()) and r.macro


def test_metrics_all_majority():
    t = np.array([0] * 9 + [1])
    r = compute_metrics(t, np.zeros(10, int), 1)
    assert r.recall == 0.0 and r.g_mean == 0.0 and r.precision == 0.0 and r.f1 == 0.0


def test_metrics_errors():
    with pytest.raises(ContractError):
        compute_metrics([], [])
    with pytest.raises(ContractError):
        compute_metrics([0, 1], [0])


@settings(max_examples=200, deadline=None)
@given(*[st.integers(0, 200)] * 4)
def test_amgm_and_balanced_auc(tp, fp, tn, fn):
    r = MetricsReport.from_counts(ConfusionCounts(tp, fp, tn, fn))
    assert r.g_mean <= r.auc_balanced + 1e-15
    assert r.auc_balanced == (r.recall + r.specificity) / 2
    assert abs(r.g_mean ** 2 - r.recall * r.specificity) <= 1e-12
    assert all(0.0 <= v <= 1.0 for v in r.values().values())


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_metrics_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    t = rng.integers(0, 3, 40)
    p = rng.integers(0, 3, 40)
    perm = rng.permutation(40)
    assert compute_metrics(t, p, n_classes=3) == compute_metrics(t[perm], p[perm], n_classes=3)


def _separable(seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 0.3, (60, 2)), rng.normal(6, 0.3, (12, 2))])
    return make_dataset(X, [0] * 60 + [1] * 12)


def test_cv_identity_separable():
    d = _separable()
    rep = cross_validate(d, "none", stratified_folds(d, 2, 0), seed=0)
    for clf in ("knn", "lr"):
        assert rep["summary"][clf]["g_mean"]["mean"] > 0.95
    assert len(rep["per_fold"]) == 2
    assert set(rep["per_fold"][0]["classifiers"]["knn"]) == set(METRICS)


def test_cv_resampling_only_touches_training():
    d = _separable(1)
    rep = cross_validate(d, "ingb", stratified_folds(d, 3, 1), seed=1)
    for f in rep["per_fold"]:
        assert f["resampled_size"] > f["train_size"]
        assert f["train_size"] + f["test_size"] == d.m


def test_cv_deterministic_bytes():
    d = _separable(2)
    folds = stratified_folds(d, 4, 3)
    a = json.dumps(cross_validate(d, "enn-ingb", folds, seed=3), sort_keys=True)
    b = json.dumps(cross_validate(d, "enn-ingb", folds, seed=3), sort_keys=True)
    assert a == b


def test_cv_parallel_matches_serial():
    d = _separable(4)
    folds = stratified_folds(d, 3, 0)
    a = cross_validate(d, "smote", folds, seed=0, jobs=1)
    b = cross_validate(d, "smote", folds, seed=0, jobs=2)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_cv_unknown_classifier():
    d = _separable()
    with pytest.raises(ContractError):
        cross_validate(d, "none", stratified_folds(d, 2), classifiers=("svm",))


def test_bench_shape():
    d = _separable()
    rows = bench(d, rates=(0.0, 0.1), pipelines=("none", "ingb"), k_folds=2, seed=0)
    assert len(rows) == 2 * 2 * 2 * len(METRICS)
