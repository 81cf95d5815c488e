"""Small classification harness: KNN, logistic regression, confusion metrics, CV."""
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from .baselines import Pipeline, ResampleConfig, run_pipeline
from .dataset import fit_minmax, inject_label_noise, NoiseSpec, stratified_folds
from .errors import ContractError
from .geometry import pairwise

METRICS = ("precision", "recall", "f1", "specificity", "auc_balanced", "g_mean")
CLASSIFIERS = ("knn", "lr")


# -- classifiers -------------------------------------------------------------

def knn_predict(train, X, k=5):
    """Majority vote of the k nearest training rows under L2.

    Vote ties go to whichever tied class owns the nearest neighbour.
    """
    if train.m == 0:
        raise ContractError("KNN needs a non-empty training set")
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    X = np.asarray(X, dtype=float)
    k = min(k, train.m)
    out = np.empty(len(X), dtype=np.int64)
    for lo in range(0, len(X), 1024):
        D = pairwise(X[lo:lo + 1024], train.features)
        nn = np.argsort(D, axis=1, kind="stable")[:, :k]
        lab = train.labels[nn]
        for r in range(len(lab)):
            votes = np.bincount(lab[r], minlength=train.k)
            tied = votes == votes.max()
            # first neighbour (closest) whose class is among the tied ones
            out[lo + r] = lab[r][np.argmax(tied[lab[r]])]
    return out


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss_and_grad(w, b, X, y):
    """Mean binary cross-entropy and its gradient w.r.t. (w, b)."""
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    err = _sigmoid(z) - y
    return loss, X.T @ err / len(y), float(err.mean())


def fit_logistic(X, y, epochs=500, lr=0.1):
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        _, gw, gb = logistic_loss_and_grad(w, b, X, y)
        w -= lr * gw
        b -= lr * gb
    return w, b


def logreg_fit_predict(train, X, epochs=500, lr=0.1):
    """Full-batch gradient descent logistic regression, one-vs-rest beyond 2 classes."""
    table = fit_minmax(train.features)
    Xtr = table.transform(train.features)
    Xte = table.transform(X)
    present = np.flatnonzero(train.class_counts())
    if len(present) == 1:
        return np.full(len(Xte), present[0], dtype=np.int64)
    if train.k == 2:
        w, b = fit_logistic(Xtr, (train.labels == 1).astype(float), epochs, lr)
        return (Xte @ w + b >= 0).astype(np.int64)
    scores = np.full((len(Xte), train.k), -np.inf)
    for c in present:
        w, b = fit_logistic(Xtr, (train.labels == c).astype(float), epochs, lr)
        scores[:, c] = Xte @ w + b
    return np.argmax(scores, axis=1)


def predict(name, train, X):
    if name == "knn":
        return knn_predict(train, X)
    if name == "lr":
        return logreg_fit_predict(train, X)
    raise ContractError(f"unknown classifier {name!r}")


# -- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def of(cls, truth, predicted, positive):
        t = truth == positive
        p = predicted == positive
        return cls(int(np.sum(t & p)), int(np.sum(~t & p)),
                   int(np.sum(~t & ~p)), int(np.sum(t & ~p)))


def _ratio(a, b):
    return a / b if b else 0.0


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    specificity: float
    auc_balanced: float
    g_mean: float
    macro: bool = False

    @classmethod
    def from_counts(cls, c):
        precision = _ratio(c.tp, c.tp + c.fp)
        recall = _ratio(c.tp, c.tp + c.fn)
        specificity = _ratio(c.tn, c.tn + c.fp)
        return cls(
            precision=precision,
            recall=recall,
            f1=_ratio(2.0 * recall * precision, recall + precision),
            specificity=specificity,
            auc_balanced=(recall + specificity) / 2.0,
            g_mean=math.sqrt(recall * specificity),
        )

    def values(self):
        return {m: getattr(self, m) for m in METRICS}


def compute_metrics(truth, predicted, positive_class=1, n_classes=None):
    """Binary metrics for ``positive_class``; macro one-vs-rest beyond 2 classes."""
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    if truth.shape != predicted.shape:
        raise ContractError("truth and predicted must have equal length")
    if truth.size == 0:
        raise ContractError("cannot score an empty prediction")
    if n_classes is None:
        n_classes = max(2, int(max(truth.max(), predicted.max())) + 1)
    if n_classes == 2:
        return MetricsReport.from_counts(ConfusionCounts.of(truth, predicted, positive_class))
    per = [MetricsReport.from_counts(ConfusionCounts.of(truth, predicted, c))
           for c in range(n_classes)]
    return MetricsReport(**{m: float(np.mean([getattr(r, m) for r in per]))
                            for m in METRICS}, macro=True)


# -- cross-validation --------------------------------------------------------

def fold_seed(seed, fold):
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def _with_seed(cfg, seed):
    return replace(cfg, seed=seed,
                   split=replace(cfg.split, seed=seed),
                   synthesis=replace(cfg.synthesis, seed=seed))


def run_fold(d, pipeline, folds, fold, classifiers, seed, cfg, positive):
    train_idx = folds.train_indices(fold)
    test_idx = folds.test_indices(fold)
    train, test = d.take(train_idx), d.take(test_idx)
    table = fit_minmax(train.features)
    train = train.with_features(table.transform(train.features))
    test_X = table.transform(test.features)

    resampled = run_pipeline(train, pipeline, _with_seed(cfg, fold_seed(seed, fold)))
    real = resampled.row_ids[~resampled.synthetic]
    assert np.isin(real, train.row_ids).all()
    assert not np.isin(real, test.row_ids).any(), "test rows leaked into training"

    scores = {}
    for name in classifiers:
        pred = predict(name, resampled, test_X)
        scores[name] = compute_metrics(test.labels, pred, positive, d.k).values()
    return {
        "classifiers": scores,
        "fold": fold,
        "resampled_size": int(resampled.m),
        "test_size": int(test.m),
        "train_size": int(train.m),
    }


def _summary(values):
    a = np.asarray(values, dtype=float)
    return {"mean": float(a.mean()), "std": float(a.std())}


def cross_validate(d, pipeline, folds, classifiers=CLASSIFIERS, seed=42, cfg=None,
                   jobs=1):
    """Resample each training fold, fit every classifier, score the held-out fold."""
    if isinstance(pipeline, str):
        pipeline = Pipeline.parse(pipeline)
    cfg = cfg or ResampleConfig()
    for c in classifiers:
        if c not in CLASSIFIERS:
            raise ContractError(f"unknown classifier {c!r}")
    positive = d.smallest_class()
    args = (d, pipeline, folds)
    rest = (tuple(classifiers), seed, cfg, positive)
    if jobs and jobs != 1:
        per_fold = Parallel(n_jobs=jobs)(
            delayed(run_fold)(*args, f, *rest) for f in range(folds.k_folds))
    else:
        per_fold = [run_fold(*args, f, *rest) for f in range(folds.k_folds)]
    per_fold.sort(key=lambda r: r["fold"])

    summary = {}
    for name in classifiers:
        summary[name] = {m: _summary([r["classifiers"][name][m] for r in per_fold])
                         for m in METRICS}
    summary["average"] = {
        m: _summary([np.mean([r["classifiers"][c][m] for c in classifiers])
                     for r in per_fold])
        for m in METRICS}
    return {
        "classifiers": list(classifiers),
        "folds": folds.k_folds,
        "per_fold": per_fold,
        "pipeline": pipeline.name,
        "positive_class": d.class_names[positive] if d.k == 2 else None,
        "seed": seed,
        "summary": summary,
    }


BENCH_RATES = (0.0, 0.1, 0.2, 0.3)
BENCH_PIPELINES = ("none", "smote", "ingb", "enn-ingb", "tkl-ingb")
BENCH_COLUMNS = ("noise_rate", "pipeline", "classifier", "metric", "mean", "std")


def bench(d, rates=BENCH_RATES, pipelines=BENCH_PIPELINES, classifiers=CLASSIFIERS,
          k_folds=10, seed=42, cfg=None, jobs=1):
    """Noise-rate x pipeline sweep; returns long-format rows (see BENCH_COLUMNS)."""
    rows = []
    for rate in rates:
        noisy, _ = inject_label_noise(d, NoiseSpec(rate, seed))
        folds = stratified_folds(noisy, k_folds, seed)
        for pl in pipelines:
            rep = cross_validate(noisy, pl, folds, classifiers, seed, cfg, jobs)
            for c in classifiers:
                for m in METRICS:
                    s = rep["summary"][c][m]
                    rows.append((rate, rep["pipeline"], c, m, s["mean"], s["std"]))
    return rows
