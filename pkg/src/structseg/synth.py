"""Deterministic synthetic fields with known ground-truth topology.

Fixtures are generated, never checked in: the test suite and the demo
workspace both call these.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import InvalidLevels, InvalidParams
from .raster_io import BinaryMask2D, ScalarField2D


def two_bump(
    width: int,
    height: int,
    peak1: float,
    peak2: float,
    saddle_value: float,
) -> tuple[ScalarField2D, float]:
    """A single ridge joining two maxima through one saddle.

    The ridge runs along the middle row: a piecewise-linear profile rises to
    ``peak1`` at w/4, dips to exactly ``saddle_value`` at w/2, rises to
    ``peak2`` at 3w/4, and tails off below the saddle at both borders.
    Off-ridge rows decay by a strictly decreasing factor, so the profile's
    two maxima and one saddle are the only critical pixel values. The
    expected branch persistence is peak2 - saddle_value.
    """
    if not (0.0 <= saddle_value < peak2 <= peak1 <= 1.0):
        raise InvalidLevels(
            f"need 0 <= saddle {saddle_value} < peak2 {peak2} <= peak1 {peak1} <= 1"
        )
    if width < 5 or height < 1:
        raise InvalidParams(f"grid {width}x{height} too small for two bumps")

    x1, xm, x2 = width // 4, width // 2, (3 * width) // 4
    base = min(saddle_value * 0.5, peak2 * 0.25)
    profile = np.empty(width, dtype=np.float64)
    for x in range(width):
        if x <= x1:
            f = x / x1 if x1 else 1.0
            profile[x] = base + (peak1 - base) * f
        elif x <= xm:
            f = (x - x1) / (xm - x1)
            profile[x] = peak1 + (saddle_value - peak1) * f
        elif x <= x2:
            f = (x - xm) / (x2 - xm)
            profile[x] = saddle_value + (peak2 - saddle_value) * f
        else:
            f = (x - x2) / (width - 1 - x2) if width - 1 > x2 else 1.0
            profile[x] = peak2 + (base - peak2) * f
    # pin the node values so the expected persistence is bit-exact
    profile[x1], profile[xm], profile[x2] = peak1, saddle_value, peak2

    y0 = (height - 1) // 2
    dy = np.abs(np.arange(height) - y0).astype(np.float64)
    falloff = np.exp(-((dy / max(2.0, height / 4.0)) ** 2)) * (1 - 1e-3 * dy)
    values = falloff[:, None] * profile[None, :]
    return ScalarField2D(width, height, values), peak2 - saddle_value


def _segment_modulation(coords: np.ndarray, anchors: np.ndarray, length: int) -> np.ndarray:
    """Triangular brightness bumps along a line: zero at the anchor positions
    (the crossings), peaking mid-segment. Keeps the branch decomposition
    non-degenerate even without noise."""
    cuts = np.concatenate([[-1], anchors, [length]])
    mod = np.zeros(length, dtype=np.float64)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        left, right = lo + 1, hi - 1
        if right < left:
            continue
        span = np.arange(left, right + 1)
        dist = np.minimum(span - lo, hi - span).astype(np.float64)
        half = max((hi - lo) / 2.0, 1.0)
        mod[left : right + 1] = dist / half
    mod[np.clip(anchors, 0, length - 1)] = 0.0
    return mod


def line_grid(
    width: int,
    height: int,
    spacing: int,
    line_value: float = 0.9,
    bg_value: float = 0.1,
    noise_amp: float = 0.0,
    seed: int = 0,
) -> tuple[ScalarField2D, BinaryMask2D, tuple[int, int]]:
    """A grid of horizontal/vertical bright lines over seeded noise.

    Lines sit at offset spacing//2 and repeat every ``spacing`` pixels. The
    clean line mask is the ground truth; with n_h horizontal and n_v vertical
    lines the true Betti numbers are b0 = 1 and b1 = (n_h-1)(n_v-1).

    Lines carry a small deterministic brightness modulation (peaks between
    crossings, dips at crossings) and the background a gentle tilt; a flat
    plateau has no well-defined branch decomposition, so the generator avoids
    emitting one.
    """
    if spacing < 3:
        raise InvalidParams(f"spacing {spacing} < 3")
    if not (0.0 <= bg_value < line_value <= 1.0):
        raise InvalidParams(f"need 0 <= bg {bg_value} < line {line_value} <= 1")
    if noise_amp < 0 or line_value <= bg_value + noise_amp:
        raise InvalidParams(
            f"need line {line_value} > bg {bg_value} + noise {noise_amp}"
        )

    offset = spacing // 2
    rows = np.arange(offset, height, spacing)
    cols = np.arange(offset, width, spacing)
    gt = np.zeros((height, width), dtype=np.uint8)
    gt[rows, :] = 1
    gt[:, cols] = 1

    mod_amp = min((line_value - bg_value) / 4.0, 1.0 - line_value)
    tilt_amp = min(0.02, (line_value - bg_value) / 8.0)
    # background rises toward the nearest line so loop-closing paths hug the
    # lines instead of wandering through cell interiors or along the border
    dist = ndimage.distance_transform_cdt(1 - gt, metric="chessboard").astype(np.float64)
    dmax = max(float(dist.max()), 1.0)
    tilt = tilt_amp * (1.0 - dist / dmax)

    values = np.full((height, width), bg_value, dtype=np.float64) + tilt
    h_mod = _segment_modulation(np.arange(width), cols, width)
    v_mod = _segment_modulation(np.arange(height), rows, height)
    for r in rows:
        values[r, :] = line_value + mod_amp * h_mod + tilt[r, :]
    for c in cols:
        values[:, c] = line_value + mod_amp * v_mod + tilt[:, c]

    if noise_amp > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.uniform(-noise_amp, noise_amp, size=values.shape)
    values = np.clip(values, 0.0, 1.0)

    n_h, n_v = len(rows), len(cols)
    if n_h and n_v:
        betti = (1, (n_h - 1) * (n_v - 1))
    else:
        betti = (n_h + n_v, 0)
    return (
        ScalarField2D(width, height, values),
        BinaryMask2D(width, height, gt),
        betti,
    )
