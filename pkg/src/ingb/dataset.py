"""Dataset container, CSV ingestion, min-max scaling, label noise and folds."""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DataFormatError

MAX_NOISE_RATE = 0.3


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Immutable labelled feature matrix.

    ``labels`` holds class indices into ``class_names``. ``row_ids`` tracks
    which original row each row came from; synthetic rows carry -1.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple
    provenance: str = ""
    row_ids: np.ndarray = None

    def __post_init__(self):
        X = _frozen(self.features, float)
        if X.ndim != 2:
            raise ContractError("features must be a 2-D matrix")
        y = _frozen(self.labels, np.int64)
        if y.shape != (X.shape[0],):
            raise ContractError("labels length does not match feature rows")
        names = tuple(str(c) for c in self.class_names)
        if len(names) < 2:
            raise ContractError("a dataset needs at least two classes")
        if len(y) and (y.min() < 0 or y.max() >= len(names)):
            raise ContractError("label index out of range of class_names")
        if not np.all(np.isfinite(X)):
            raise ContractError("features contain NaN or infinite values")
        ids = np.arange(X.shape[0]) if self.row_ids is None else self.row_ids
        ids = _frozen(ids, np.int64)
        if ids.shape != y.shape:
            raise ContractError("row_ids length does not match feature rows")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "row_ids", ids)

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def n(self):
        return self.features.shape[1]

    @property
    def k(self):
        return len(self.class_names)

    @property
    def synthetic(self):
        return self.row_ids < 0

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.k)

    def largest_class(self):
        return int(np.argmax(self.class_counts()))

    def smallest_class(self):
        counts = self.class_counts()
        present = np.where(counts > 0, counts, np.iinfo(np.int64).max)
        return int(np.argmin(present))

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_names,
                       self.provenance, self.row_ids[idx])

    def with_features(self, features):
        return Dataset(features, self.labels, self.class_names, self.provenance,
                       self.row_ids)

    def with_labels(self, labels):
        return Dataset(self.features, labels, self.class_names, self.provenance,
                       self.row_ids)

    def append_synthetic(self, features, label):
        """Return a new dataset with synthetic rows of a single class appended."""
        features = np.asarray(features, dtype=float).reshape(-1, self.n)
        if len(features) == 0:
            return self
        X = np.vstack([self.features, features])
        y = np.concatenate([self.labels, np.full(len(features), label)])
        ids = np.concatenate([self.row_ids, np.full(len(features), -1)])
        return Dataset(X, y, self.class_names, self.provenance, ids)


def load_csv(path, label_column=None, provenance=None):
    """Read a headed CSV; the label column defaults to the last one."""
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    return parse_csv(text, label_column, provenance or str(path))


def parse_csv(text, label_column=None, provenance=""):
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError("empty CSV: header row missing")
    header = [h.strip() for h in rows[0]]
    if label_column is None:
        li = len(header) - 1
    elif label_column in header:
        li = header.index(label_column)
    else:
        raise DataFormatError(f"label column {label_column!r} not in header")
    if len(header) < 2:
        raise DataFormatError("need at least one feature column and a label column")
    feature_cols = [j for j in range(len(header)) if j != li]

    X, raw_labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(
                f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        values = []
        for j in feature_cols:
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"row {lineno}, column {header[j]!r}: "
                    f"cannot parse {cell!r} as a number") from None
            if not math.isfinite(v):
                raise DataFormatError(
                    f"row {lineno}, column {header[j]!r}: non-finite value {cell!r}")
            values.append(v)
        X.append(values)
        raw_labels.append(row[li].strip())
    if not X:
        raise DataFormatError("CSV has a header but no data rows")

    names = list(dict.fromkeys(raw_labels))
    if len(names) < 2:
        raise DataFormatError(f"need at least two classes, found {names}")
    lookup = {name: i for i, name in enumerate(names)}
    y = np.array([lookup[v] for v in raw_labels], dtype=np.int64)
    counts = np.bincount(y, minlength=len(names))
    small = [names[c] for c in np.flatnonzero(counts < 2)]
    if small:
        raise DataFormatError(f"classes with fewer than 2 instances: {small}")
    ds = Dataset(np.array(X, dtype=float), y, names, provenance)
    return ds, [header[j] for j in feature_cols], header[li]


def format_csv(d, feature_names=None, label_name="label", synthetic_column=True):
    """Serialize a dataset; appends a 0/1 ``synthetic`` column by default."""
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(d.n)]
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    header = list(feature_names) + [label_name]
    if synthetic_column:
        header.append("synthetic")
    w.writerow(header)
    synth = d.synthetic
    for i in range(d.m):
        row = [repr(float(v)) for v in d.features[i]]
        row.append(d.class_names[d.labels[i]])
        if synthetic_column:
            row.append("1" if synth[i] else "0")
        w.writerow(row)
    return out.getvalue()


@dataclass(frozen=True)
class MinMaxTable:
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.lo) / safe
        return np.where(span > 0, out, 0.0)

    def inverse(self, X):
        X = np.asarray(X, dtype=float)
        span = self.hi - self.lo
        return np.where(span > 0, X * span + self.lo, self.lo)


def fit_minmax(X):
    X = np.asarray(X, dtype=float)
    return MinMaxTable(X.min(axis=0), X.max(axis=0))


def scale_minmax(d):
    """Map every feature affinely onto [0, 1]; constant features become 0."""
    table = fit_minmax(d.features)
    return d.with_features(table.transform(d.features)), table


@dataclass(frozen=True)
class NoiseSpec:
    rate: float
    seed: int = 42

    def __post_init__(self):
        if not 0.0 <= self.rate <= MAX_NOISE_RATE:
            raise ContractError(
                f"noise rate must lie in [0, {MAX_NOISE_RATE}], got {self.rate}")


def inject_label_noise(d, spec):
    """Flip floor(rate * count) labels per class to a different, random class.

    Returns the corrupted dataset and the sorted list of flipped row positions.
    """
    rng = np.random.default_rng(spec.seed)
    labels = d.labels.copy()
    flipped = []
    for c in range(d.k):
        members = np.flatnonzero(d.labels == c)
        n_flip = int(math.floor(spec.rate * len(members) + 1e-9))
        if n_flip == 0:
            continue
        chosen = rng.choice(members, size=n_flip, replace=False)
        # offset in 1..k-1 guarantees a different class
        offsets = rng.integers(1, d.k, size=n_flip)
        labels[chosen] = (c + offsets) % d.k
        flipped.extend(chosen.tolist())
    flipped.sort()
    return d.with_labels(labels), flipped


@dataclass(frozen=True)
class FoldPlan:
    k_folds: int
    assignments: np.ndarray
    seed: int = 42

    def test_indices(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def splits(self):
        for f in range(self.k_folds):
            yield f, self.train_indices(f), self.test_indices(f)


def stratified_folds(d, k_folds=10, seed=42):
    """Assign each row to a fold so every class is spread as evenly as possible."""
    k_folds = int(k_folds)
    if k_folds < 2:
        raise ContractError(f"need at least 2 folds, got {k_folds}")
    counts = d.class_counts()
    short = [d.class_names[c] for c in range(d.k) if 0 < counts[c] < k_folds]
    if short:
        raise ContractError(
            f"classes {short} have fewer than {k_folds} instances")
    rng = np.random.default_rng(seed)
    assignments = np.empty(d.m, dtype=np.int64)
    start = 0
    for c in range(d.k):
        members = rng.permutation(np.flatnonzero(d.labels == c))
        # rotate the starting fold so remainders do not pile up on fold 0
        assignments[members] = (start + np.arange(len(members))) % k_folds
        start = (start + len(members)) % k_folds
    return FoldPlan(k_folds, _frozen(assignments, np.int64), seed)
