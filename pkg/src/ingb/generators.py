"""Seeded synthetic benchmark datasets (imbalance ratio 10 unless noted)."""
import numpy as np

from .dataset import Dataset
from .errors import ContractError
from .informed import largest_remainder


def _split_counts(m, weights):
    return [int(c) for c in largest_remainder(m, np.asarray(weights, dtype=float))]


def _assemble(parts, names, tag):
    X = np.vstack(parts)
    y = np.concatenate([np.full(len(p), i) for i, p in enumerate(parts)])
    return Dataset(X, y, names, tag)


def blobs2(m=1100, seed=42):
    """Two overlapping 2-D Gaussian blobs, 10:1."""
    rng = np.random.default_rng(seed)
    n_maj, n_min = _split_counts(m, [10, 1])
    maj = rng.normal([0.0, 0.0], 1.0, size=(n_maj, 2))
    mino = rng.normal([2.5, 0.0], 0.75, size=(n_min, 2))
    return _assemble([maj, mino], ["majority", "minority"], f"blobs2(m={m},seed={seed})")


def blobs3(m=1100, seed=42):
    """Three 2-D Gaussian blobs on a triangle, 10:4:1."""
    rng = np.random.default_rng(seed)
    counts = _split_counts(m, [10, 4, 1])
    angles = np.deg2rad([90.0, 210.0, 330.0])
    centers = 2.5 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    parts = [rng.normal(c, 1.0, size=(k, 2)) for c, k in zip(centers, counts)]
    return _assemble(parts, ["c0", "c1", "c2"], f"blobs3(m={m},seed={seed})")


def ring(m=1100, seed=42):
    """Minority Gaussian core surrounded by a majority annulus, 10:1."""
    rng = np.random.default_rng(seed)
    n_maj, n_min = _split_counts(m, [10, 1])
    theta = rng.uniform(0.0, 2.0 * np.pi, n_maj)
    rad = rng.uniform(1.2, 3.0, n_maj)
    maj = np.stack([rad * np.cos(theta), rad * np.sin(theta)], axis=1)
    maj += rng.normal(0.0, 0.15, size=maj.shape)
    mino = rng.normal(0.0, 0.5, size=(n_min, 2))
    return _assemble([maj, mino], ["majority", "minority"], f"ring(m={m},seed={seed})")


def highdim(m=1100, seed=42, n=20):
    """Two unit-variance Gaussian blobs in 20 dimensions, 10:1."""
    rng = np.random.default_rng(seed)
    n_maj, n_min = _split_counts(m, [10, 1])
    maj = rng.normal(0.0, 1.0, size=(n_maj, n))
    mino = rng.normal(0.5, 1.0, size=(n_min, n))
    return _assemble([maj, mino], ["majority", "minority"], f"highdim(m={m},seed={seed})")


GENERATORS = {"blobs2": blobs2, "blobs3": blobs3, "ring": ring, "highdim": highdim}


def generate(name, m=1100, seed=42):
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise ContractError(
            f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    return fn(m=m, seed=seed)
