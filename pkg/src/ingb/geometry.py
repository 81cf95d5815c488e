"""Numeric kernel: log-gamma, n-ball volume in log space, Minkowski distances."""
import math

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ContractError

LOG_PI = math.log(math.pi)


def check_order(p):
    p = float(p)
    if not p >= 1.0:
        raise ContractError(f"distance order p must be >= 1, got {p}")
    return p


def log_gamma(x):
    """ln Gamma(x) for real x > 0."""
    x = float(x)
    if not x > 0:
        raise ContractError(f"log_gamma is defined for x > 0, got {x}")
    return math.lgamma(x)


def log_ball_volume(n, r):
    """Natural log of the volume of an n-dimensional ball of radius r.

    Stays in log space so that ratios like count**n / volume remain finite
    in high dimension.
    """
    if int(n) != n or n < 1:
        raise ContractError(f"dimension must be a positive integer, got {n}")
    if not r > 0:
        raise ContractError(f"radius must be positive, got {r}")
    n = int(n)
    return 0.5 * n * LOG_PI + n * math.log(r) - log_gamma(0.5 * n + 1.0)


def minkowski_distance(a, b, p=2.0):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    p = check_order(p)
    diff = np.abs(a - b)
    if p == 2.0:
        return float(np.sqrt(np.dot(diff.ravel(), diff.ravel())))
    if p == 1.0:
        return float(diff.sum())
    return float(np.sum(diff ** p) ** (1.0 / p))


def distances_to(X, point, p=2.0):
    """Minkowski distance from every row of X to a single point."""
    diff = np.abs(np.asarray(X, dtype=float) - np.asarray(point, dtype=float))
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if p == 1.0:
        return diff.sum(axis=1)
    return np.sum(diff ** p, axis=1) ** (1.0 / p)


def pairwise(XA, XB, p=2.0):
    """Dense Minkowski distance matrix between the rows of XA and XB."""
    p = check_order(p)
    if p == 2.0:
        return cdist(XA, XB, "euclidean")
    if p == 1.0:
        return cdist(XA, XB, "cityblock")
    return cdist(XA, XB, "minkowski", p=p)
