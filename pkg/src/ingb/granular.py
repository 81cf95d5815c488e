"""Granular-ball construction and adaptive splitting."""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError
from .geometry import check_order, distances_to


@dataclass(frozen=True)
class SplitConfig:
    T: float = 1.0
    p: float = 2.0
    max_lloyd_iters: int = 100
    tol: float = 1e-6
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.T <= 1.0:
            raise ContractError(f"state bound T must lie in (0, 1], got {self.T}")
        check_order(self.p)


@dataclass(frozen=True, eq=False)
class GranularBall:
    members: np.ndarray
    center: np.ndarray
    radius: float
    support_radius: float
    label: int
    state: float
    class_counts: np.ndarray
    terminal: bool = False

    @property
    def size(self):
        return len(self.members)

    @property
    def n_classes(self):
        return int(np.count_nonzero(self.class_counts))

    def to_json(self, class_names=None):
        label = self.label if class_names is None else class_names[self.label]
        return json.dumps({
            "center": [float(v) for v in self.center],
            "label": label,
            "members": self.size,
            "radius": self.radius,
            "state": self.state,
            "support_radius": self.support_radius,
        }, sort_keys=True)


def make_ball(d, members, p=2.0):
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise ContractError("a granular ball needs at least one member")
    X = d.features[members]
    center = X.mean(axis=0)
    dist = distances_to(X, center, p)
    counts = np.bincount(d.labels[members], minlength=d.k)
    label = int(np.argmax(counts))  # ties -> smaller class index
    return GranularBall(
        members=members,
        center=center,
        radius=float(dist.mean()),
        support_radius=float(dist.max()),
        label=label,
        state=float(counts[label]) / members.size,
        class_counts=counts,
    )


def can_split(gb, d, cfg):
    """Size and purity conditions for splitting a ball into one part per class."""
    if gb.terminal:
        return False
    return gb.size >= gb.n_classes * (d.n + 1) and gb.state < cfg.T


def wcss(X, assign, centroids):
    diff = X - centroids[assign]
    return float(np.einsum("ij,ij->", diff, diff))


def lloyd_partition(X, init, max_iters=100, tol=1e-6):
    """Lloyd iteration from fixed initial centroids.

    Returns (assignment, centroids, wcss_history). The history holds the
    objective after each centroid update and is non-increasing. Clusters that
    empty out are reseeded with the point farthest from its centroid.
    """
    X = np.asarray(X, dtype=float)
    # centring keeps the expanded squared-distance form well conditioned
    shift = X.mean(axis=0)
    Xc = X - shift
    centroids = np.array(init, dtype=float) - shift
    k = len(centroids)
    labels = np.arange(k)
    assign = None
    history = []
    for _ in range(max_iters):
        d2 = np.einsum("ij,ij->i", centroids, centroids)[None, :] - 2.0 * (Xc @ centroids.T)
        new_assign = np.argmin(d2, axis=1)  # ties -> smaller centroid index
        counts = np.bincount(new_assign, minlength=k)
        if not counts.all():
            _reseed_empty(Xc, new_assign, centroids, counts)
        stable = assign is not None and np.array_equal(new_assign, assign)
        assign = new_assign
        onehot = (assign[:, None] == labels).astype(float)
        centroids = (onehot.T @ Xc) / counts[:, None]
        history.append(wcss(Xc, assign, centroids))
        if stable:
            break
        if len(history) > 1 and history[-2] - history[-1] < tol:
            break
    return assign, centroids + shift, history


def _reseed_empty(X, assign, centroids, counts):
    for j in np.flatnonzero(counts == 0):
        diff = X - centroids[assign]
        far = np.einsum("ij,ij->i", diff, diff)
        # never strip a cluster down to nothing
        far[counts[assign] <= 1] = -1.0
        i = int(np.argmax(far))
        counts[assign[i]] -= 1
        assign[i] = j
        counts[j] = 1
        centroids[j] = X[i]


def split_ball(gb, d, cfg):
    """Split an eligible ball into one sub-ball per class present.

    Initial centroids are the per-class means of the members, so the result
    is deterministic given the data.
    """
    if not can_split(gb, d, cfg):
        raise ContractError("split_ball called on a ball that cannot be split")
    children, _ = _split(gb, d, cfg)
    return children


def _split(gb, d, cfg):
    X = d.features[gb.members]
    y = d.labels[gb.members]
    classes = np.flatnonzero(gb.class_counts)
    init = np.array([X[y == c].mean(axis=0) for c in classes])
    assign, _, history = lloyd_partition(X, init, cfg.max_lloyd_iters, cfg.tol)
    order = np.argsort(assign, kind="stable")
    bounds = np.cumsum(np.bincount(assign, minlength=len(classes)))[:-1]
    children = [make_ball(d, part, cfg.p)
                for part in np.split(gb.members[order], bounds)]
    return children, history


@dataclass
class SplitEvent:
    parent: GranularBall
    children: list
    wcss_history: list
    parent_wcss: float


def build_balls(d, cfg=None, on_split=None):
    """Decompose the dataset into granular balls.

    Starts from a single ball holding everything and keeps splitting until no
    ball satisfies ``can_split``. A split that does not strictly reduce the
    within-ball sum of squares marks the ball terminal instead. ``on_split``,
    when given, receives a SplitEvent for every accepted split.
    """
    cfg = cfg or SplitConfig()
    stack = [make_ball(d, np.arange(d.m), cfg.p)]
    leaves = []
    while stack:
        gb = stack.pop()
        if not can_split(gb, d, cfg):
            leaves.append(gb)
            continue
        children, history = _split(gb, d, cfg)
        X = d.features[gb.members] - gb.center
        parent_wcss = float(np.einsum("ij,ij->", X, X))
        same = any(c.size == gb.size for c in children)
        if same or not history[-1] < parent_wcss:
            leaves.append(replace(gb, terminal=True))
            continue
        if on_split is not None:
            on_split(SplitEvent(gb, children, history, parent_wcss))
        stack.extend(reversed(children))
    return leaves


def dump_balls(balls, class_names=None):
    """JSON-lines diagnostic dump, one ball per line."""
    return "".join(b.to_json(class_names) + "\n" for b in balls)
