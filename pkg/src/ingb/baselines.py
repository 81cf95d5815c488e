"""Reference samplers and cleaners, plus stage pipelines built from them."""
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .geometry import pairwise
from .granular import SplitConfig
from .informed import SynthesisConfig, ingb_oversample

CLEANERS = ("enn", "tkl")
OVERSAMPLERS = ("smote", "ingb")
_ALIASES = {"tomek": "tkl", "s": "smote"}


def neighbor_order(X, k, p=2.0):
    """Indices of the k nearest other rows for every row (ties -> smaller index)."""
    m = len(X)
    out = np.empty((m, k), dtype=np.int64)
    for lo in range(0, m, 1024):
        D = pairwise(X[lo:lo + 1024], X, p)
        rows = np.arange(D.shape[0])
        D[rows, lo + rows] = np.inf
        out[lo:lo + 1024] = np.argsort(D, axis=1, kind="stable")[:, :k]
    return out


def smote(d, k=5, target_class=None, deficit=None, seed=42):
    """Interpolate ``deficit`` new rows between target rows and their neighbours.

    Seeds cycle over the target rows in order; each partner is one of the k
    nearest same-class rows chosen uniformly, and the new point sits at a
    uniform random position along the connecting segment.
    """
    if target_class is None:
        target_class = d.smallest_class()
    counts = d.class_counts()
    if deficit is None:
        deficit = int(counts.max() - counts[target_class])
    if deficit <= 0:
        return d
    rows = np.flatnonzero(d.labels == target_class)
    if rows.size < 2:
        raise ContractError(
            f"SMOTE needs at least 2 instances of class "
            f"{d.class_names[target_class]!r}, found {rows.size}")
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    k = min(k, rows.size - 1)
    X = d.features[rows]
    nn = neighbor_order(X, k)
    rng = np.random.default_rng(seed)
    base = np.arange(deficit) % rows.size
    partner = nn[base, rng.integers(k, size=deficit)]
    lam = rng.random(deficit)[:, None]
    new = X[base] + lam * (X[partner] - X[base])
    return d.append_synthetic(new, target_class)


def smote_balance(d, k=5, seed=42):
    """SMOTE every class up to the largest class count."""
    counts = d.class_counts()
    top = d.largest_class()
    out = d
    for c in range(d.k):
        if c != top and 0 < counts[c] < counts[top]:
            out = smote(out, k, c, int(counts[top] - counts[c]), seed=seed + 7919 * c)
    return out


def enn_filter(d, k=3):
    """Drop rows whose k nearest neighbours mostly carry another label.

    A row is removed only when some other class strictly outvotes its own
    class among the neighbours; ties keep the row.
    """
    if d.m <= k:
        return d, []
    nn = neighbor_order(d.features, k)
    votes = np.zeros((d.m, d.k), dtype=np.int64)
    np.add.at(votes, (np.repeat(np.arange(d.m), k), d.labels[nn].ravel()), 1)
    own = votes[np.arange(d.m), d.labels]
    votes[np.arange(d.m), d.labels] = -1
    removed = np.flatnonzero(votes.max(axis=1) > own)
    keep = np.setdiff1d(np.arange(d.m), removed)
    return d.take(keep), removed.tolist()


def tomek_filter(d):
    """Remove the larger-class member of every Tomek link.

    A Tomek link is a pair of rows from different classes that are each
    other's nearest neighbour. When both classes have equal counts neither
    row is removed.
    """
    if d.m < 2:
        return d, []
    nn = neighbor_order(d.features, 1)[:, 0]
    counts = d.class_counts()
    removed = set()
    for a in range(d.m):
        b = nn[a]
        if a < b and nn[b] == a and d.labels[a] != d.labels[b]:
            ca, cb = counts[d.labels[a]], counts[d.labels[b]]
            if ca > cb:
                removed.add(a)
            elif cb > ca:
                removed.add(int(b))
    removed = sorted(removed)
    keep = np.setdiff1d(np.arange(d.m), removed)
    return d.take(keep), removed


@dataclass(frozen=True)
class Pipeline:
    stages: tuple = ()

    def __post_init__(self):
        stages = tuple(self.stages)
        for s in stages:
            if s not in CLEANERS + OVERSAMPLERS:
                raise ContractError(f"unknown pipeline stage {s!r}")
        if sum(s in OVERSAMPLERS for s in stages) > 1:
            raise ContractError("a pipeline may hold at most one oversampling stage")
        object.__setattr__(self, "stages", stages)

    @property
    def name(self):
        return "-".join(self.stages) if self.stages else "none"

    @classmethod
    def parse(cls, text):
        """Parse a dash-separated stage string such as ``enn-ingb``."""
        text = (text or "").strip().lower()
        if text in ("", "none", "identity"):
            return cls(())
        stages = []
        for tok in text.split("-"):
            tok = _ALIASES.get(tok, tok)
            if tok not in CLEANERS + OVERSAMPLERS:
                raise ContractError(f"unknown pipeline stage {tok!r} in {text!r}")
            stages.append(tok)
        return cls(tuple(stages))


@dataclass(frozen=True)
class ResampleConfig:
    split: SplitConfig = SplitConfig()
    synthesis: SynthesisConfig = SynthesisConfig()
    smote_k: int = 5
    seed: int = 42


def run_pipeline(d, pipeline, cfg=None, log=None):
    """Apply pipeline stages in order. ``log``, if a list, collects stage info."""
    if isinstance(pipeline, str):
        pipeline = Pipeline.parse(pipeline)
    cfg = cfg or ResampleConfig()
    for stage in pipeline.stages:
        before = d.m
        info = {"stage": stage}
        if stage == "enn":
            d, removed = enn_filter(d)
            info["removed"] = len(removed)
        elif stage == "tkl":
            d, removed = tomek_filter(d)
            info["removed"] = len(removed)
        elif stage == "smote":
            d = smote_balance(d, cfg.smote_k, cfg.seed)
            info["added"] = d.m - before
        else:
            d, report = ingb_oversample(d, cfg.split, cfg.synthesis, return_report=True)
            info["added"] = d.m - before
            info["report"] = report
        if log is not None:
            log.append(info)
    return d
