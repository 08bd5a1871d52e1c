"""Structural segmentation toolkit.

Converts a 2D likelihood map into an explicit family of topological
structures (Morse branches ordered by persistence), fits a Gaussian over the
pruning threshold, and uses it to sample structure-preserving segmentations,
score structure-level uncertainty, and drive branch-by-branch proofreading.
"""

from .errors import StructsegError
from .family import Skeleton, SkeletonFamily
from .morse import MorseBranch, extract_morse_complex
from .prob import LossConfig, ThresholdDistribution
from .raster_io import BinaryMask2D, PersistenceDiagram, ScalarField2D

__all__ = [
    "BinaryMask2D",
    "LossConfig",
    "MorseBranch",
    "PersistenceDiagram",
    "ScalarField2D",
    "Skeleton",
    "SkeletonFamily",
    "StructsegError",
    "ThresholdDistribution",
    "extract_morse_complex",
]

__version__ = "0.1.0"
