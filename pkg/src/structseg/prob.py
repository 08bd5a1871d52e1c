"""Gaussian threshold model over the branch family, and the training losses.

The threshold distribution plays both the prior and posterior roles. Sampled
thresholds use the reparameterized form mu + sigma*z, clamped to
[0, eps_max]; branch probabilities use the unclamped CDF, so the two agree
except for Gaussian mass outside [0, eps_max].

Losses are pure functions (mean binary cross-entropy, its skeleton-masked
Monte Carlo expectation, closed-form Gaussian KL, and their weighted total)
so an external trainer can consume them; no network code lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSigma, DimensionMismatch
from .family import SkeletonFamily
from .raster_io import BinaryMask2D, ScalarField2D


@dataclass(frozen=True)
class ThresholdDistribution:
    """N(mu, sigma) over the persistence threshold; sigma = 0 is permitted
    only as the deterministic sampler mode."""

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def to_json(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma}

    @classmethod
    def from_json(cls, obj: dict) -> "ThresholdDistribution":
        return cls(float(obj["mu"]), float(obj["sigma"]))


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 1.0  # skeleton-loss weight
    beta: float = 10.0  # KL weight
    mc_samples: int = 16
    bce_clip: float = 1e-7

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if not (0 < self.bce_clip < 0.5):
            raise ValueError("bce_clip must be in (0, 0.5)")


def sample_epsilon(
    dist: ThresholdDistribution,
    rng: np.random.Generator,
    eps_max: float = math.inf,
) -> float:
    """One reparameterized draw mu + sigma*z, clamped to [0, eps_max]."""
    z = float(rng.standard_normal())
    return min(max(dist.mu + dist.sigma * z, 0.0), eps_max)


def cdf(dist: ThresholdDistribution, x: float) -> float:
    """Gaussian CDF at x, accurate to ~1e-15 via erf."""
    if dist.sigma == 0:
        raise DegenerateSigma("CDF undefined for sigma = 0")
    z = (x - dist.mu) / (dist.sigma * math.sqrt(2.0))
    return 0.5 * (1.0 + math.erf(z))


def branch_probability(dist: ThresholdDistribution, branch) -> float:
    """P(branch survives a sampled threshold) = CDF(persistence); a branch
    with infinite persistence is always included."""
    if math.isinf(branch.persistence):
        return 1.0
    return cdf(dist, branch.persistence)


def branch_confidence(dist: ThresholdDistribution, branch) -> float:
    return abs(branch_probability(dist, branch) - 0.5)


def branch_uncertainty(dist: ThresholdDistribution, branch) -> float:
    """0.5 - confidence; maximal (0.5) when inclusion is a coin flip."""
    return 0.5 - branch_confidence(dist, branch)


def kl_gaussian(q: ThresholdDistribution, p: ThresholdDistribution) -> float:
    """Closed-form KL(q || p) for univariate Gaussians."""
    if q.sigma == 0 or p.sigma == 0:
        raise DegenerateSigma("KL undefined for sigma = 0")
    return (
        math.log(p.sigma / q.sigma)
        + (q.sigma**2 + (q.mu - p.mu) ** 2) / (2.0 * p.sigma**2)
        - 0.5
    )


def _as_values(arr) -> np.ndarray:
    if isinstance(arr, ScalarField2D):
        return arr.values
    if isinstance(arr, BinaryMask2D):
        return arr.bits.astype(np.float64)
    return np.asarray(arr, dtype=np.float64)


def bce(
    target,
    pred: ScalarField2D,
    mask: BinaryMask2D | None = None,
    clip: float = 1e-7,
) -> float:
    """Mean binary cross-entropy over mask-selected pixels.

    Predictions are clipped to [clip, 1-clip]; an empty mask yields 0 by the
    vacuous-sum convention (this keeps the skeleton expectation finite for
    the empty skeleton).
    """
    y = _as_values(target)
    p = _as_values(pred)
    if y.shape != p.shape:
        raise DimensionMismatch(f"target {y.shape} vs pred {p.shape}")
    if mask is not None:
        if mask.bits.shape != p.shape:
            raise DimensionMismatch(f"mask {mask.bits.shape} vs pred {p.shape}")
        sel = mask.bits.astype(bool)
        if not sel.any():
            return 0.0
        y = y[sel]
        p = p[sel]
    p = np.clip(p, clip, 1.0 - clip)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))


def skeleton_loss_mc(
    field: ScalarField2D,
    gt: BinaryMask2D,
    family: SkeletonFamily,
    dist: ThresholdDistribution,
    cfg: LossConfig,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo expectation over sampled thresholds of the BCE between the
    skeleton-masked ground truth and the skeleton-masked likelihood."""
    if gt.bits.shape != field.values.shape:
        raise DimensionMismatch(f"gt {gt.bits.shape} vs field {field.values.shape}")
    ceiling = family.eps_max()
    draws = [sample_epsilon(dist, rng, ceiling) for _ in range(cfg.mc_samples)]
    losses = [
        bce(gt, field, mask=family.skeleton_at(eps).pixels, clip=cfg.bce_clip)
        for eps in draws
    ]
    if len(set(losses)) == 1:  # keeps the sigma=0 case bit-exact
        return losses[0]
    return math.fsum(losses) / len(losses)


def total_loss(
    field: ScalarField2D,
    gt: BinaryMask2D,
    family: SkeletonFamily,
    q: ThresholdDistribution,
    p: ThresholdDistribution,
    cfg: LossConfig,
    rng: np.random.Generator,
) -> tuple[float, dict[str, float]]:
    """seg + alpha*skeleton + beta*KL(q||p), with the parts for logging."""
    seg = bce(gt, field, clip=cfg.bce_clip)
    skeleton = skeleton_loss_mc(field, gt, family, q, cfg, rng)
    kl = kl_gaussian(q, p)
    total = seg + cfg.alpha * skeleton + cfg.beta * kl
    return total, {"seg": seg, "skeleton": skeleton, "kl": kl}


def fit_threshold_distribution(
    field: ScalarField2D,
    gt: BinaryMask2D,
    family: SkeletonFamily,
    grow,
    plateau_drop: float = 0.01,
    sigma_floor: float = 1e-3,
) -> ThresholdDistribution:
    """Desk-scale threshold fit standing in for a learned posterior.

    Evaluates J(eps) = Dice(grow(skeleton_at(eps)), gt) at every distinct
    finite persistence level plus midpoints (plus one level above the
    maximum, where only never-cancelled branches survive). mu is the argmax
    (smallest on ties); sigma is the half-width of the widest contiguous
    evaluated interval around mu where J stays within plateau_drop of the
    optimum, floored at sigma_floor.
    """
    from .metrics import dice  # local import keeps module layering acyclic

    if gt.bits.shape != field.values.shape:
        raise DimensionMismatch(f"gt {gt.bits.shape} vs field {field.values.shape}")
    levels = sorted(set(family.finite_persistences()))
    if levels:
        grid = [levels[0]]
        for lo, hi in zip(levels, levels[1:]):
            grid.extend(((lo + hi) / 2.0, hi))
        grid.append(levels[-1] + 1.0)
    else:
        grid = [0.0, 1.0]

    scores = [dice(grow(family.skeleton_at(eps)), gt) for eps in grid]
    best = max(range(len(grid)), key=lambda i: (scores[i], -i))
    cutoff = scores[best] - plateau_drop
    lo = best
    while lo > 0 and scores[lo - 1] >= cutoff:
        lo -= 1
    hi = best
    while hi < len(grid) - 1 and scores[hi + 1] >= cutoff:
        hi += 1
    sigma = max((grid[hi] - grid[lo]) / 2.0, sigma_floor)
    return ThresholdDistribution(float(grid[best]), float(sigma))
