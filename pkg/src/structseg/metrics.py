"""Pixel-wise and topology-aware segmentation metrics.

Connected components follow the 8-connected foreground / 4-connected
background convention throughout. Entropies are in nats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, EmptyForeground, PatchTooLarge
from .raster_io import BinaryMask2D

EIGHT = np.ones((3, 3), dtype=int)
FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)


@dataclass
class MetricReport:
    dice: float
    ari: float
    voi: float
    betti0_error: float
    betti1_error: float
    patch_size: int
    patch_count: int
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _check_dims(a: BinaryMask2D, b: BinaryMask2D) -> None:
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatch(f"{a.bits.shape} vs {b.bits.shape}")


def dice(a: BinaryMask2D, b: BinaryMask2D) -> float:
    """2|A n B| / (|A| + |B|); two empty masks count as a perfect match."""
    _check_dims(a, b)
    sa, sb = int(a.bits.sum()), int(b.bits.sum())
    if sa + sb == 0:
        return 1.0
    inter = int((a.bits & b.bits).sum())
    return 2.0 * inter / (sa + sb)


def _pair_count(sizes: np.ndarray) -> float:
    return float((sizes.astype(np.float64) * (sizes - 1) / 2.0).sum())


def rand_f_score(pred: BinaryMask2D, gt: BinaryMask2D) -> float:
    """Maximal F-score of the foreground-restricted Rand index.

    Both masks are labeled into 8-connected components; over unordered pairs
    of pixels foreground in either mask, a pair counts as joined in a
    segmentation when both pixels share one of its foreground components
    (background pixels act as singletons). precision = joined in both /
    joined in pred, recall = joined in both / joined in gt, so splitting one
    ground-truth component mirrors merging two of them.
    """
    _check_dims(pred, gt)
    if gt.bits.sum() == 0 or pred.bits.sum() == 0:
        raise EmptyForeground("both masks need non-empty foreground")
    gt_labels, _ = ndimage.label(gt.bits, structure=EIGHT)
    pred_labels, _ = ndimage.label(pred.bits, structure=EIGHT)
    sel = (gt.bits | pred.bits).astype(bool)
    g = gt_labels[sel]
    p = pred_labels[sel]

    same_gt = _pair_count(np.bincount(g)[1:])
    fg = p > 0
    same_pred = _pair_count(np.bincount(p[fg])[1:]) if fg.any() else 0.0
    both = fg & (g > 0)
    joint = g.astype(np.int64) * (int(p.max()) + 1) + p
    joint_sizes = (
        np.unique(joint[both], return_counts=True)[1] if both.any() else np.array([])
    )
    same_both = _pair_count(joint_sizes) if len(joint_sizes) else 0.0

    if same_pred == 0.0 and same_gt == 0.0:
        return 1.0
    if same_pred == 0.0 or same_gt == 0.0:
        return 0.0
    precision = same_both / same_pred
    recall = same_both / same_gt
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _cluster_labels(mask: BinaryMask2D) -> np.ndarray:
    """Foreground components as clusters 1..k, background as cluster 0."""
    labels, _ = ndimage.label(mask.bits, structure=EIGHT)
    return labels


def voi(pred: BinaryMask2D, gt: BinaryMask2D) -> float:
    """Variation of information between the two pixel clusterings, in nats."""
    _check_dims(pred, gt)
    s = _cluster_labels(pred).ravel()
    t = _cluster_labels(gt).ravel()
    n = s.size
    joint = s.astype(np.int64) * (int(t.max()) + 1) + t
    counts = np.unique(joint, return_counts=True)[1]
    p_joint = counts / n
    _, s_counts = np.unique(s, return_counts=True)
    _, t_counts = np.unique(t, return_counts=True)
    h_s = -np.sum(s_counts / n * np.log(s_counts / n))
    h_t = -np.sum(t_counts / n * np.log(t_counts / n))
    mi = float(np.sum(p_joint * np.log(p_joint)))  # -H(S,T)
    h_joint = -mi
    # VOI = H(S|T) + H(T|S) = 2 H(S,T) - H(S) - H(T)
    return max(float(2.0 * h_joint - h_s - h_t), 0.0)


def betti_numbers(mask: BinaryMask2D) -> tuple[int, int]:
    """(components, independent loops) of the foreground.

    b0 counts 8-connected foreground components; b1 counts bounded 4-connected
    background components of the zero-padded frame.
    """
    fg = mask.bits
    if fg.sum() == 0:
        return 0, 0
    _, b0 = ndimage.label(fg, structure=EIGHT)
    padded = np.pad(fg, 1)
    _, c_bg = ndimage.label(1 - padded, structure=FOUR)
    return int(b0), int(c_bg - 1)


def betti_error(
    pred: BinaryMask2D,
    gt: BinaryMask2D,
    patch_size: int = 65,
    patches: int = 100,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean absolute Betti-number difference over seeded random patches."""
    _check_dims(pred, gt)
    h, w = gt.bits.shape
    if patch_size > min(h, w):
        raise PatchTooLarge(f"patch {patch_size} exceeds image {w}x{h}")
    rng = np.random.default_rng(seed)
    e0 = e1 = 0.0
    for _ in range(patches):
        y = int(rng.integers(0, h - patch_size + 1))
        x = int(rng.integers(0, w - patch_size + 1))
        sub_pred = BinaryMask2D(
            patch_size, patch_size, pred.bits[y : y + patch_size, x : x + patch_size]
        )
        sub_gt = BinaryMask2D(
            patch_size, patch_size, gt.bits[y : y + patch_size, x : x + patch_size]
        )
        p0, p1 = betti_numbers(sub_pred)
        g0, g1 = betti_numbers(sub_gt)
        e0 += abs(p0 - g0)
        e1 += abs(p1 - g1)
    return e0 / patches, e1 / patches


def report(
    pred: BinaryMask2D,
    gt: BinaryMask2D,
    patch_size: int = 65,
    patches: int = 100,
    seed: int = 0,
) -> MetricReport:
    """All four metrics in one record; patch params recorded alongside."""
    size = min(patch_size, gt.bits.shape[0], gt.bits.shape[1])
    e0, e1 = betti_error(pred, gt, size, patches, seed)
    try:
        ari = rand_f_score(pred, gt)
    except EmptyForeground:
        ari = 1.0 if dice(pred, gt) == 1.0 else 0.0
    return MetricReport(
        dice=dice(pred, gt),
        ari=ari,
        voi=voi(pred, gt),
        betti0_error=e0,
        betti1_error=e1,
        patch_size=size,
        patch_count=patches,
        seed=seed,
    )
