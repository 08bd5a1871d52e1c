import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

sys.path.insert(0, str(Path(__file__).parent))

from structseg.raster_io import BinaryMask2D, ScalarField2D


def random_field(seed: int, h: int = 16, w: int = 16) -> ScalarField2D:
    rng = np.random.default_rng(seed)
    return ScalarField2D(w, h, rng.random((h, w)))


def smooth_field(seed: int, h: int = 12, w: int = 12, sigma: float = 1.5) -> ScalarField2D:
    rng = np.random.default_rng(seed)
    vals = ndimage.gaussian_filter(rng.random((h, w)), sigma)
    vals = (vals - vals.min()) / max(vals.max() - vals.min(), 1e-12)
    return ScalarField2D(w, h, vals)


def cross_field(size: int = 21, tips=(1.0, 0.9, 0.85, 0.8), center: float = 0.6,
                bg: float = 0.1) -> tuple[ScalarField2D, np.ndarray]:
    """Four bright arms rising from a central dip to four tip maxima.

    Returns the field and the boolean arm mask (the cross-shaped ridge).
    """
    h = w = size
    c = size // 2
    vals = np.full((h, w), bg)
    yy, xx = np.mgrid[0:h, 0:w]
    vals = vals + 0.02 * (xx + yy) / (2.0 * size)
    mask = np.zeros((h, w), dtype=bool)
    arm_len = c - 2
    for tip_val, (dy, dx) in zip(tips, ((0, 1), (0, -1), (-1, 0), (1, 0))):
        for k in range(arm_len + 1):
            t = k / arm_len
            y, x = c + dy * k, c + dx * k
            vals[y, x] = center + (tip_val - center) * t
            mask[y, x] = True
    return ScalarField2D(w, h, np.clip(vals, 0.0, 1.0)), mask


def random_mask(seed: int, h: int = 8, w: int = 8, p: float = 0.4) -> BinaryMask2D:
    rng = np.random.default_rng(seed)
    return BinaryMask2D(w, h, (rng.random((h, w)) < p).astype(np.uint8))


@pytest.fixture
def two_bump_field():
    from structseg.synth import two_bump

    field, eps = two_bump(16, 9, 1.0, 0.8, 0.6)
    return field, eps


@pytest.fixture
def two_bump_family(two_bump_field):
    from structseg.morse import extract_morse_complex

    field, eps = two_bump_field
    return field, eps, extract_morse_complex(field)
