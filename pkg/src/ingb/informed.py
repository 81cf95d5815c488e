"""Informed granular-ball oversampling.

Pipeline per target class: keep the balls labelled with that class, score
each by the entropy of its normalised density statistics, keep the balls at
or above the mean entropy as seeds, split the class deficit across seeds in
proportion to their sparsity, and draw isotropic Gaussian samples around
weighted pairs of same-class members inside each seed ball.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .geometry import distances_to, log_ball_volume, pairwise
from .granular import SplitConfig, build_balls

EPS = 1e-12
_CHUNK = 2048


@dataclass(frozen=True)
class SynthesisConfig:
    sigma_scale: float = 1.0
    max_rejects: int = 10
    seed: int = 42
    # exponent on |GB| in the sparsity ratio: "n" (feature dimension) or "1"
    sparsity_exponent: str = "n"
    # "ge-mean" keeps balls with entropy >= mean; "le-mean" inverts it
    seed_threshold: str = "ge-mean"
    # "informed" weights pairs by their density statistic, "uniform" uses 0.5
    pair_weights: str = "informed"

    def __post_init__(self):
        if not self.sigma_scale > 0:
            raise ContractError(f"sigma_scale must be positive, got {self.sigma_scale}")
        if self.sparsity_exponent not in ("n", "1"):
            raise ContractError(
                f"sparsity_exponent must be 'n' or '1', got {self.sparsity_exponent!r}")
        if self.seed_threshold not in ("ge-mean", "le-mean"):
            raise ContractError(
                f"seed_threshold must be 'ge-mean' or 'le-mean', got {self.seed_threshold!r}")
        if self.pair_weights not in ("informed", "uniform"):
            raise ContractError(
                f"pair_weights must be 'informed' or 'uniform', got {self.pair_weights!r}")
        if self.max_rejects < 0:
            raise ContractError("max_rejects must be non-negative")


def ball_phi(gb, d, p=2.0):
    """Density statistic for every member of a ball, in member order.

    For a member x: homo = other members with x's class, hete = members of
    other classes. phi = (|homo| / sum dist to homo) divided by
    (|hete| / sum dist to hete) when hete is non-empty; just the first ratio
    otherwise; 0 when x is alone in its class within the ball.
    """
    X = d.features[gb.members]
    y = d.labels[gb.members]
    N = len(y)
    same_count = np.bincount(y, minlength=d.k)[y] - 1
    other_count = N - 1 - same_count
    same_sum = np.empty(N)
    other_sum = np.empty(N)
    for lo in range(0, N, _CHUNK):
        D = pairwise(X[lo:lo + _CHUNK], X, p)
        same = y[lo:lo + _CHUNK, None] == y[None, :]
        # self-distance is 0, so including it in the same-class sum is harmless
        same_sum[lo:lo + _CHUNK] = np.where(same, D, 0.0).sum(axis=1)
        other_sum[lo:lo + _CHUNK] = np.where(same, 0.0, D).sum(axis=1)
    homo = same_count / (same_sum + EPS)
    hete = other_count / (other_sum + EPS)
    phi = np.where(other_count > 0, homo / np.where(hete > 0, hete, 1.0), homo)
    return np.where(same_count > 0, phi, 0.0)


def instance_stat(gb, i, d, p=2.0):
    """Density statistic of dataset row ``i``, which must belong to ``gb``."""
    pos = np.flatnonzero(gb.members == i)
    if pos.size == 0:
        raise ContractError(f"row {i} is not a member of this ball")
    return float(ball_phi(gb, d, p)[pos[0]])


def entropy_of(phi):
    """Entropy of normalised phi, scaled by 1/N."""
    phi = np.asarray(phi, dtype=float)
    N = len(phi)
    total = phi.sum()
    if N == 0 or total <= 0:
        return 0.0
    rho = phi[phi > 0] / total
    return float(-np.sum(rho * np.log2(rho)) / N)


def ball_entropy(gb, d, p=2.0):
    return entropy_of(ball_phi(gb, d, p))


def select_seeds(entropies, threshold="ge-mean"):
    """Positions of the balls whose entropy clears the mean entropy."""
    delta = np.asarray(entropies, dtype=float)
    if delta.size == 0:
        return []
    mean = delta.mean()
    slack = 1e-12 * max(1.0, abs(mean))  # summation rounding on equal values
    if threshold == "ge-mean":
        keep = delta >= mean - slack
    else:
        keep = delta <= mean + slack
    return np.flatnonzero(keep).tolist()


@dataclass
class SeedPlan:
    target_class: int
    deficit: int
    quotas: dict = field(default_factory=dict)
    log_sparsity: dict = field(default_factory=dict)
    entropy: dict = field(default_factory=dict)

    def to_dict(self, class_names=None):
        target = self.target_class if class_names is None else class_names[self.target_class]
        return {
            "deficit": self.deficit,
            "entropy": {str(k): v for k, v in self.entropy.items()},
            "log_sparsity": {str(k): v for k, v in self.log_sparsity.items()},
            "quotas": {str(k): v for k, v in self.quotas.items()},
            "target_class": target,
        }

    def to_json(self, class_names=None):
        return json.dumps(self.to_dict(class_names), sort_keys=True)


def log_sparsity(size, radius, n, exponent="n"):
    """ln(|GB|^e / V_n(r)); +inf for a zero-radius ball."""
    power = n if exponent == "n" else 1
    if radius <= 0:
        return math.inf
    return power * math.log(size) - log_ball_volume(n, radius)


def largest_remainder(total, weights):
    """Integer apportionment of ``total`` proportional to ``weights``."""
    w = np.asarray(weights, dtype=float)
    share = total * w / w.sum()
    base = np.floor(share + 1e-9).astype(np.int64)
    base = np.minimum(base, total)
    left = int(total - base.sum())
    if left > 0:
        frac = share - base
        order = np.lexsort((np.arange(len(w)), -frac))  # ties -> smaller index
        base[order[:left]] += 1
    elif left < 0:
        order = np.lexsort((np.arange(len(w)), share - base))
        for j in order:
            if left == 0:
                break
            if base[j] > 0:
                base[j] -= 1
                left += 1
    return base


def allocate(seed_balls, d, deficit, target_class=0, exponent="n", ids=None):
    """Split ``deficit`` synthetic samples across seed balls by sparsity."""
    if deficit <= 0:
        raise ContractError(f"deficit must be positive, got {deficit}")
    if not seed_balls:
        raise ContractError("allocation needs at least one seed ball")
    ids = list(range(len(seed_balls))) if ids is None else list(ids)
    ls = np.array([log_sparsity(b.size, b.radius, d.n, exponent) for b in seed_balls])
    finite = np.isfinite(ls)
    if finite.any():
        top = ls[finite].max()
        w = np.where(finite, np.exp(ls - top), 1.0)
    else:
        w = np.ones(len(ls))
    quotas = largest_remainder(deficit, w)
    return SeedPlan(
        target_class=target_class,
        deficit=int(deficit),
        quotas={i: int(q) for i, q in zip(ids, quotas)},
        log_sparsity={i: float(v) for i, v in zip(ids, ls)},
    )


def synthesize_in_ball(gb, quota, d, cfg, target_class, p=2.0, rng=None,
                       phi=None, trace=None):
    """Draw ``quota`` synthetic points of ``target_class`` inside ``gb``.

    ``trace``, if a list, receives (pair_center, sigma, first_draw) per
    sample, recorded before any rejection.
    """
    targets = np.flatnonzero(d.labels[gb.members] == target_class)
    if targets.size == 0:
        raise ContractError("ball has no member of the target class")
    if quota <= 0:
        return np.empty((0, d.n))
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if phi is None:
        phi = ball_phi(gb, d, p)
    X = d.features[gb.members]
    n = d.n
    sqrt_n = math.sqrt(n)
    out = np.empty((quota, n))
    for s in range(quota):
        a = targets[s % targets.size]
        if targets.size > 1:
            b = targets[rng.integers(targets.size - 1)]
            if b == a:
                b = targets[-1]
        else:
            b = a
        if cfg.pair_weights == "uniform" or phi[a] + phi[b] <= 0:
            w = 0.5
        else:
            w = phi[a] / (phi[a] + phi[b])
        xa, xb = X[a], X[b]
        c = w * xa + (1.0 - w) * xb
        r = (w * distances_to(xa[None, :], c, p)[0]
             + (1.0 - w) * distances_to(xb[None, :], c, p)[0])
        if r <= 0:
            r = gb.radius / 10.0
        sigma = cfg.sigma_scale * r / sqrt_n
        z = rng.normal(c, sigma) if sigma > 0 else c.copy()
        if trace is not None:
            trace.append((c, sigma, z.copy()))
        tries = 0
        while _outside(z, gb, p) and tries < cfg.max_rejects:
            z = rng.normal(c, sigma)
            tries += 1
        if _outside(z, gb, p):
            z = _project(z, gb, p)
        out[s] = z
    return out


def _outside(z, gb, p):
    return distances_to(z[None, :], gb.center, p)[0] > gb.support_radius


def _project(z, gb, p):
    offset = z - gb.center
    norm = distances_to(offset[None, :], np.zeros_like(offset), p)[0]
    z = gb.center + offset * (gb.support_radius / norm)
    shrink = 1.0
    while _outside(z, gb, p):
        shrink *= 1.0 - 1e-12
        z = gb.center + offset * (gb.support_radius / norm) * shrink
    return z


def jitter_fallback(d, target_class, count, rng):
    """Gaussian jitter around random target rows, for classes without balls."""
    rows = np.flatnonzero(d.labels == target_class)
    if rows.size == 0:
        raise ContractError(
            f"class {d.class_names[target_class]!r} has no instances to oversample")
    scale = d.features.max(axis=0) - d.features.min(axis=0)
    sigma = 0.01 * np.where(scale > 0, scale, 1.0)
    picks = rows[rng.integers(rows.size, size=count)]
    return d.features[picks] + rng.normal(0.0, 1.0, size=(count, d.n)) * sigma


@dataclass
class OversampleReport:
    balls: list
    plans: list
    fallback_classes: list

    def to_dict(self, class_names=None):
        return {
            "balls_built": len(self.balls),
            "fallback_classes": [class_names[c] if class_names else c
                                 for c in self.fallback_classes],
            "rounds": [p.to_dict(class_names) for p in self.plans],
        }


def ingb_round(d, balls, target_class, deficit, split_cfg, synth_cfg):
    """One oversampling round for a single class.

    Returns (new_points, SeedPlan or None when the fallback path was used).
    """
    p = split_cfg.p
    root = np.random.SeedSequence([synth_cfg.seed, target_class])
    candidates = [j for j, b in enumerate(balls) if b.label == target_class]
    if not candidates:
        rng = np.random.default_rng(root.spawn(1)[0])
        return jitter_fallback(d, target_class, deficit, rng), None

    phis = {j: ball_phi(balls[j], d, p) for j in candidates}
    delta = [entropy_of(phis[j]) for j in candidates]
    picked = [candidates[i] for i in select_seeds(delta, synth_cfg.seed_threshold)]
    plan = allocate([balls[j] for j in picked], d, deficit, target_class,
                    synth_cfg.sparsity_exponent, ids=picked)
    plan.entropy = {j: float(v) for j, v in zip(candidates, delta)}

    chunks = []
    for j in picked:
        q = plan.quotas[j]
        if q == 0:
            continue
        # one RNG stream per ball, derived from (seed, class, ball id)
        rng = np.random.default_rng(
            np.random.SeedSequence([synth_cfg.seed, target_class, j]))
        chunks.append(synthesize_in_ball(balls[j], q, d, synth_cfg,
                                         target_class, p, rng, phis[j]))
    return np.vstack(chunks), plan


def ingb_oversample(d, split_cfg=None, synth_cfg=None, return_report=False):
    """Balance every class up to the largest class count.

    Original rows are kept verbatim; synthetic rows are appended class by
    class with row id -1.
    """
    split_cfg = split_cfg or SplitConfig()
    synth_cfg = synth_cfg or SynthesisConfig()
    counts = d.class_counts()
    if np.count_nonzero(counts) < 2:
        raise ContractError("oversampling needs at least two populated classes")
    top = d.largest_class()
    goal = counts[top]
    todo = [c for c in range(d.k) if c != top and 0 < counts[c] < goal]

    balls = build_balls(d, split_cfg) if todo else []
    plans, fallback = [], []
    out = d
    for c in todo:
        pts, plan = ingb_round(d, balls, c, int(goal - counts[c]), split_cfg, synth_cfg)
        if plan is None:
            fallback.append(c)
        else:
            plans.append(plan)
        out = out.append_synthetic(pts, c)
    if return_report:
        return out, OversampleReport(balls, plans, fallback)
    return out
