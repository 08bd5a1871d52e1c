"""Growing skeletons into structural segmentations, plus uncertainty maps.

Foreground components are 8-connected (background 4-connected), the standard
digital-topology pairing. Skeleton pixels are always unioned into the grown
mask, so a sampled structure is never broken by the binarization threshold.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DegenerateSigma, DimensionMismatch, TooFewSamples
from .family import SkeletonFamily, Skeleton
from .prob import ThresholdDistribution, branch_probability, sample_epsilon
from .raster_io import BinaryMask2D, ScalarField2D

EIGHT = np.ones((3, 3), dtype=int)


def binarize(field: ScalarField2D, tau: float = 0.5) -> BinaryMask2D:
    """Threshold the likelihood map: pixel = 1 iff value >= tau."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    return BinaryMask2D(field.width, field.height, (field.values >= tau).astype(np.uint8))


class StructuralSegmentation:
    """A grown mask together with its source skeleton and kept components."""

    def __init__(self, mask: BinaryMask2D, source_skeleton: Skeleton,
                 kept_components: list[int]):
        self.mask = mask
        self.source_skeleton = source_skeleton
        self.kept_components = kept_components


def grow_segmentation(binary: BinaryMask2D, skeleton: Skeleton) -> StructuralSegmentation:
    """Keep the binary components touched by the skeleton, union the skeleton.

    The output therefore contains every skeleton pixel, and each of its
    components intersects the skeleton.
    """
    sk = skeleton.pixels
    if binary.bits.shape != sk.bits.shape:
        raise DimensionMismatch(f"binary {binary.bits.shape} vs skeleton {sk.bits.shape}")
    labels, _ = ndimage.label(binary.bits, structure=EIGHT)
    touched = np.unique(labels[sk.bits.astype(bool)])
    touched = [int(t) for t in touched if t > 0]
    grown = np.isin(labels, touched) | sk.bits.astype(bool)
    mask = BinaryMask2D(binary.width, binary.height, grown.astype(np.uint8))
    return StructuralSegmentation(mask, skeleton, touched)


def sample_segmentations(
    field: ScalarField2D,
    family: SkeletonFamily,
    dist: ThresholdDistribution,
    n: int,
    rng: np.random.Generator,
    tau: float = 0.5,
) -> list[StructuralSegmentation]:
    """n independent threshold draws, each grown over binarize(field, tau)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    binary = binarize(field, tau)
    ceiling = family.eps_max()
    out = []
    for _ in range(n):
        eps = sample_epsilon(dist, rng, ceiling)
        out.append(grow_segmentation(binary, family.skeleton_at(eps)))
    return out


def empirical_uncertainty(samples: list[StructuralSegmentation]) -> ScalarField2D:
    """Per-pixel population variance across sampled masks; in [0, 0.25]."""
    if len(samples) < 2:
        raise TooFewSamples("need at least 2 samples for a variance map")
    shapes = {s.mask.bits.shape for s in samples}
    if len(shapes) != 1:
        raise DimensionMismatch(f"sample shapes differ: {shapes}")
    stack = np.stack([s.mask.bits for s in samples]).astype(np.float64)
    var = stack.var(axis=0)
    h, w = var.shape
    return ScalarField2D(w, h, var)


def analytic_branch_uncertainty(
    family: SkeletonFamily, dist: ThresholdDistribution
) -> tuple[dict[int, float], ScalarField2D]:
    """Per-branch uncertainty 0.5 - |CDF(persistence) - 0.5| and its raster.

    Every pixel of a branch carries that branch's uncertainty; where branches
    overlap the larger value wins.
    """
    if dist.sigma == 0:
        raise DegenerateSigma("analytic uncertainty needs sigma > 0")
    table: dict[int, float] = {}
    out = np.zeros((family.height, family.width), dtype=np.float64)
    for b in family.branches:
        unc = 0.5 - abs(branch_probability(dist, b) - 0.5)
        table[b.id] = unc
        if len(b.pixels):
            ys, xs = b.pixels[:, 0], b.pixels[:, 1]
            out[ys, xs] = np.maximum(out[ys, xs], unc)
    return table, ScalarField2D(family.width, family.height, out)
