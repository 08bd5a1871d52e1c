"""The persistence-ordered branch family and its one-parameter skeletons.

A skeleton at threshold eps keeps exactly the branches with persistence >=
eps (non-strict, so CDF-based branch probabilities are exact on a closed
interval). Branch ids are assigned at discovery and never renumbered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import TooManyBranches
from .raster_io import BinaryMask2D


@dataclass(frozen=True)
class Skeleton:
    """A branch subset rendered to pixels."""

    branch_ids: frozenset[int]
    pixels: BinaryMask2D


@dataclass
class SkeletonFamily:
    """All branches of the complete Morse complex, sorted by ascending
    persistence (+inf last, ties by id)."""

    width: int
    height: int
    branches: list  # objects with .id, .persistence, .pixels ((n, 2) yx array)

    @classmethod
    def from_branches(cls, width: int, height: int, branches: Sequence) -> "SkeletonFamily":
        ordered = sorted(branches, key=lambda b: (b.persistence, b.id))
        return cls(width, height, list(ordered))

    def __len__(self) -> int:
        return len(self.branches)

    def by_id(self, branch_id: int):
        for b in self.branches:
            if b.id == branch_id:
                return b
        raise KeyError(branch_id)

    def finite_persistences(self) -> list[float]:
        return [b.persistence for b in self.branches if math.isfinite(b.persistence)]

    def eps_max(self) -> float:
        """Clamp ceiling for sampled thresholds: largest finite persistence + 1."""
        finite = self.finite_persistences()
        return (max(finite) + 1.0) if finite else 1.0

    def render(self, branch_ids) -> BinaryMask2D:
        bits = np.zeros((self.height, self.width), dtype=np.uint8)
        wanted = set(branch_ids)
        for b in self.branches:
            if b.id in wanted and len(b.pixels):
                bits[b.pixels[:, 0], b.pixels[:, 1]] = 1
        return BinaryMask2D(self.width, self.height, bits)

    def skeleton_at(self, epsilon: float) -> Skeleton:
        """Branches surviving the threshold: persistence >= epsilon."""
        ids = frozenset(b.id for b in self.branches if b.persistence >= epsilon)
        return Skeleton(ids, self.render(ids))

    def enumerate_structures(self, max_branches: int = 12) -> Iterator[Skeleton]:
        """All 2^N branch subsets; any of them is a legitimate structural
        segmentation. Guarded: N must not exceed max_branches."""
        n = len(self.branches)
        if n > max_branches:
            raise TooManyBranches(f"{n} branches exceeds guard {max_branches}")
        ids = [b.id for b in self.branches]
        for bitset in range(1 << n):
            subset = frozenset(ids[i] for i in range(n) if bitset >> i & 1)
            yield Skeleton(subset, self.render(subset))

    def branch_table(self) -> list[tuple[int, float, int, list[tuple[int, int]]]]:
        """(id, persistence, pixel_count, endpoints) rows, descending
        persistence with id tie-break."""
        rows = []
        for b in self.branches:
            ends = b.endpoints_yx() if hasattr(b, "endpoints_yx") else []
            rows.append((b.id, b.persistence, int(len(b.pixels)), ends))
        rows.sort(key=lambda r: (-r[1], r[0]))
        return rows


def skeleton_at(family: SkeletonFamily, epsilon: float) -> Skeleton:
    return family.skeleton_at(epsilon)


def enumerate_structures(family: SkeletonFamily, max_branches: int = 12) -> Iterator[Skeleton]:
    return family.enumerate_structures(max_branches)


def branch_table(family: SkeletonFamily):
    return family.branch_table()
