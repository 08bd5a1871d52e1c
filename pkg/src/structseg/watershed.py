"""Persistent-homology filtered topology watershed for volume-style data.

Vertices of the 4-connectivity proximity graph are processed in ascending
value (ties by row-major index). Each lower-star edge either closes a loop,
merges two basins (appending the younger basin's birth to the diagram), or —
when the merge persistence reaches theta — becomes a watershed edge that
keeps the basins apart. The membrane is the union of watershed-edge
endpoints; it plays the role of a skeleton for boundary-type structures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyThetaList
from .family import SkeletonFamily
from .raster_io import BinaryMask2D, PersistenceDiagram, ScalarField2D

LOOP, TREE, WATERSHED = "loop", "tree", "watershed"

Edge = tuple[int, int]  # flat vertex indices, (lower-ordered, higher-ordered)


@dataclass
class WatershedBranch:
    """Membrane pseudo-branch: a connected pixel group with the largest theta
    at which those pixels still appear."""

    id: int
    persistence: float
    pixels: np.ndarray  # (n, 2) yx

    def endpoints_yx(self) -> list[tuple[int, int]]:
        return []


class _UnionFind:
    """Union-find over flat vertex ids; each root remembers its basin minimum
    as (value, index) so 'younger basin' comparisons share the total order."""

    def __init__(self, n: int, values: np.ndarray):
        self.parent = np.arange(n, dtype=np.int64)
        self.values = values
        self.min_vertex = np.arange(n, dtype=np.int64)

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return int(root)

    def min_of(self, root: int) -> int:
        return int(self.min_vertex[root])

    def merge(self, keep: int, absorb: int) -> None:
        self.parent[absorb] = keep
        km, am = self.min_vertex[keep], self.min_vertex[absorb]
        if (self.values[am], am) < (self.values[km], km):
            self.min_vertex[keep] = am


def _sorted_vertices(values: np.ndarray) -> np.ndarray:
    flat = values.ravel()
    return np.lexsort((np.arange(flat.size), flat))


def ph_watershed(
    field: ScalarField2D,
    theta: float,
    sorted_vertices: np.ndarray | None = None,
) -> tuple[BinaryMask2D, PersistenceDiagram, dict[Edge, str]]:
    """Run the filtered watershed at one threshold.

    Returns the membrane mask, the diagram of merge pairs (birth of the
    younger basin, merge value), and the final tag per processed edge.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    values = field.values
    h, w = values.shape
    flat = values.ravel()
    n = flat.size
    order = sorted_vertices if sorted_vertices is not None else _sorted_vertices(values)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)

    uf = _UnionFind(n, flat)
    seen = np.zeros(n, dtype=bool)
    tags: dict[Edge, str] = {}
    pairs: list[tuple[float, float]] = []
    watershed_vertices: set[int] = set()

    for v in order:
        v = int(v)
        t = flat[v]
        seen[v] = True
        y, x = divmod(v, w)
        # lower-star edges (u, v): 4-neighbors strictly below v in the total
        # order, enumerated left, right, up, down
        for dy, dx in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            ny, nx = y + dy, x + dx
            if not (0 <= ny < h and 0 <= nx < w):
                continue
            u = ny * w + nx
            if pos[u] > pos[v]:
                continue
            edge: Edge = (u, v)
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                tags[edge] = LOOP
                continue
            tags[edge] = TREE
            mu, mv = uf.min_of(ru), uf.min_of(rv)
            # younger basin: the one whose minimum is higher in the order
            if (flat[mu], mu) > (flat[mv], mv):
                younger, older = ru, rv
                younger_min = mu
            else:
                younger, older = rv, ru
                younger_min = mv
            pers = t - flat[younger_min]
            if pers >= theta:
                tags[edge] = WATERSHED
                watershed_vertices.add(u)
                watershed_vertices.add(v)
                continue
            uf.merge(older, younger)
            pairs.append((float(flat[younger_min]), float(t)))

    bits = np.zeros(n, dtype=np.uint8)
    if watershed_vertices:
        bits[sorted(watershed_vertices)] = 1
    membrane = BinaryMask2D(w, h, bits.reshape(h, w))
    return membrane, PersistenceDiagram(pairs), tags


def boundary_skeleton_family(
    field: ScalarField2D, thetas: list[float]
) -> SkeletonFamily:
    """Membrane pseudo-branch family over an ascending theta list.

    Each membrane pixel gets the largest theta at which it still appears;
    8-connected groups of pixels sharing that level become pseudo-branches
    with persistence equal to the level. The result behaves like a Morse
    SkeletonFamily for thresholding, sampling, and growing.
    """
    if not thetas:
        raise EmptyThetaList("thetas must be a non-empty ascending list")
    if sorted(thetas) != list(thetas):
        raise ValueError("thetas must be ascending")
    order = _sorted_vertices(field.values)
    level = np.full((field.height, field.width), -math.inf)
    for theta in thetas:
        membrane, _, _ = ph_watershed(field, theta, sorted_vertices=order)
        level[membrane.bits.astype(bool)] = theta

    branches: list[WatershedBranch] = []
    next_id = 0
    eight = np.ones((3, 3), dtype=int)
    for theta in thetas:
        at_level = level == theta
        if not at_level.any():
            continue
        labels, count = ndimage.label(at_level, structure=eight)
        for lab in range(1, count + 1):
            ys, xs = np.nonzero(labels == lab)
            branches.append(
                WatershedBranch(
                    id=next_id,
                    persistence=float(theta),
                    pixels=np.column_stack([ys, xs]).astype(np.int64),
                )
            )
            next_id += 1
    return SkeletonFamily.from_branches(field.width, field.height, branches)
