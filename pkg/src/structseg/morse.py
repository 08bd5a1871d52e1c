"""Discrete gradient fields, saddle branches, and persistence by cancellation.

The gradient is built per vertex by lower-star processing: cells in each
lower star are paired greedily along the total order, unpaired cells become
critical (minimum = vertex, saddle = edge, maximum = square).

A saddle's branch is its pair of V-paths: from each endpoint of the critical
edge, follow vertex -> paired edge -> opposite vertex until a critical vertex.
Ranks strictly decrease along the walk, so paths terminate and render as
1-pixel-wide 4-connected chains.

Persistence is assigned by cancelling critical (vertex, edge) pairs joined by
a unique V-path, cheapest value difference first; saddles never cancelled
(both paths reaching the same endpoint, i.e. loop-closing branches) keep the
+inf sentinel. On a field negated once at extract_morse_complex, branches are
the bright ridges and the value differences equal the superlevel merge
persistences of the original field.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .cubical import Cell, CubicalComplex, build_complex
from .errors import NotASaddle
from .family import SkeletonFamily
from .raster_io import ScalarField2D

INF_PERSISTENCE = math.inf


@dataclass
class DiscreteGradientField:
    complex: CubicalComplex
    pairing: dict[Cell, Cell]  # cell -> the coface it is paired with
    critical: set[Cell]

    def is_critical(self, cell: Cell) -> bool:
        return cell in self.critical

    def partner(self, cell: Cell) -> Cell | None:
        return self.pairing.get(cell)


@dataclass
class MorseBranch:
    """One stable-manifold piece: a saddle edge plus its two descending paths."""

    id: int
    saddle: Cell
    sides: tuple[tuple[Cell, ...], tuple[Cell, ...]]  # each starts at the saddle
    endpoint_maxima: tuple[Cell, ...]  # distinct terminal critical cells (<= 2)
    persistence: float | None  # None until assigned; math.inf if never cancelled
    pixels: np.ndarray  # (n, 2) int array of (y, x), sorted row-major

    @property
    def path_cells(self) -> tuple[Cell, ...]:
        seen: dict[Cell, None] = {}
        for side in self.sides:
            for c in side:
                seen[c] = None
        return tuple(seen)

    def endpoints_yx(self) -> list[tuple[int, int]]:
        return [(c.cy // 2, c.cx // 2) for c in self.endpoint_maxima]


def build_gradient(complex: CubicalComplex) -> DiscreteGradientField:
    """Lower-star construction of a discrete gradient vector field."""
    pairing: dict[Cell, Cell] = {}
    paired: set[Cell] = set()
    critical: set[Cell] = set()

    for v in complex.iter_vertices():
        star = complex.lower_star(v)
        if len(star) == 1:
            critical.add(v)
            continue
        in_star = set(star)
        edges = sorted((c for c in star if c.dim == 1), key=complex.cell_key)
        squares = [c for c in star if c.dim == 2]

        def available_faces(cell: Cell) -> list[Cell]:
            return [
                f
                for f in complex.faces(cell)
                if f in in_star and f not in paired and f not in critical
            ]

        delta = edges[0]
        pairing[v] = delta
        paired.add(v)
        paired.add(delta)

        pq_zero: list[tuple[tuple[int, ...], Cell]] = []
        pq_one: list[tuple[tuple[int, ...], Cell]] = []
        for e in edges[1:]:
            heapq.heappush(pq_zero, (complex.cell_key(e), e))
        for s in squares:
            if delta in complex.faces(s) and len(available_faces(s)) == 1:
                heapq.heappush(pq_one, (complex.cell_key(s), s))

        def push_cofaces(changed: Cell) -> None:
            for s in squares:
                if s in paired or s in critical:
                    continue
                if changed in complex.faces(s) and len(available_faces(s)) == 1:
                    heapq.heappush(pq_one, (complex.cell_key(s), s))

        while pq_one or pq_zero:
            while pq_one:
                _, alpha = heapq.heappop(pq_one)
                if alpha in paired or alpha in critical:
                    continue
                avail = available_faces(alpha)
                if not avail:
                    heapq.heappush(pq_zero, (complex.cell_key(alpha), alpha))
                    continue
                lam = avail[0]
                pairing[lam] = alpha
                paired.add(lam)
                paired.add(alpha)
                push_cofaces(alpha)
                push_cofaces(lam)
            if pq_zero:
                _, gamma = heapq.heappop(pq_zero)
                if gamma in paired or gamma in critical:
                    continue
                critical.add(gamma)
                push_cofaces(gamma)

    return DiscreteGradientField(complex, pairing, critical)


def critical_cells(dgf: DiscreteGradientField) -> list[tuple[Cell, str]]:
    """Unpaired cells classified by dimension: min, saddle, or max."""
    kind = {0: "min", 1: "saddle", 2: "max"}
    cells = sorted(dgf.critical, key=lambda c: (c.dim, c.cy, c.cx))
    return [(c, kind[c.dim]) for c in cells]


def _walk_side(
    complex: CubicalComplex,
    pairing: dict[Cell, Cell],
    critical: set[Cell],
    saddle: Cell,
    start_vertex: Cell,
) -> tuple[Cell, ...]:
    """V-path from a saddle through one endpoint down to a critical vertex."""
    path = [saddle]
    v = start_vertex
    while True:
        path.append(v)
        if v in critical:
            return tuple(path)
        e = pairing[v]
        path.append(e)
        a, b = complex.faces(e)
        v = b if a == v else a


def render_cells(cells, width: int, height: int) -> np.ndarray:
    """Pixel rendering: a vertex maps to its pixel, an edge to its 2 endpoint
    pixels, a square to its 4 corner pixels. Returns sorted (n, 2) (y, x)."""
    px: set[tuple[int, int]] = set()
    for c in cells:
        xs = (c.cx // 2,) if c.cx % 2 == 0 else (c.cx // 2, c.cx // 2 + 1)
        ys = (c.cy // 2,) if c.cy % 2 == 0 else (c.cy // 2, c.cy // 2 + 1)
        for y in ys:
            for x in xs:
                px.add((y, x))
    if not px:
        return np.zeros((0, 2), dtype=np.int64)
    return np.array(sorted(px), dtype=np.int64)


def trace_manifold(dgf: DiscreteGradientField, saddle: Cell) -> MorseBranch:
    """The saddle's branch (no persistence yet): both V-paths to the maxima."""
    if saddle.dim != 1 or saddle not in dgf.critical:
        raise NotASaddle(f"{saddle} is not a critical edge")
    cx = dgf.complex
    sides = tuple(
        _walk_side(cx, dgf.pairing, dgf.critical, saddle, u)
        for u in cx.faces(saddle)
    )
    ends: dict[Cell, None] = {side[-1]: None for side in sides}
    cells = {saddle} | {c for side in sides for c in side}
    return MorseBranch(
        id=-1,
        saddle=saddle,
        sides=sides,  # type: ignore[arg-type]
        endpoint_maxima=tuple(ends),
        persistence=None,
        pixels=render_cells(cells, cx.width, cx.height),
    )


def _side_candidates(
    complex: CubicalComplex,
    pairing: dict[Cell, Cell],
    critical: set[Cell],
    saddle: Cell,
) -> tuple[tuple[tuple[Cell, ...], tuple[Cell, ...]], dict[Cell, float]]:
    """Current sides of a saddle and its cancellable endpoints.

    An endpoint is cancellable only when reached by exactly one of the two
    paths; two paths to the same vertex mean the V-path is not unique.
    """
    sides = tuple(
        _walk_side(complex, pairing, critical, saddle, u)
        for u in complex.faces(saddle)
    )
    end_a, end_b = sides[0][-1], sides[1][-1]
    cands: dict[Cell, float] = {}
    if end_a != end_b:
        sval = complex.cell_value(saddle)
        cands[end_a] = sval - complex.cell_value(end_a)
        cands[end_b] = sval - complex.cell_value(end_b)
    return sides, cands  # type: ignore[return-value]


def compute_branch_persistence(
    dgf: DiscreteGradientField, complex: CubicalComplex | None = None
) -> list[MorseBranch]:
    """All saddle branches with persistences from Morse cancellation.

    Geometry is traced on the pristine gradient; cancellation runs on a
    working copy, repeatedly removing the cancellable (vertex, edge) critical
    pair of minimal value difference and reversing its V-path. Branch ids
    follow discovery order: cancelled saddles in cancellation order, then the
    never-cancelled ones.
    """
    cx = complex if complex is not None else dgf.complex
    saddles = sorted(
        (c for c in dgf.critical if c.dim == 1), key=cx.cell_key
    )
    base = {s: trace_manifold(dgf, s) for s in saddles}

    pairing = dict(dgf.pairing)
    critical = set(dgf.critical)

    info: dict[Cell, tuple] = {}
    cand: dict[Cell, dict[Cell, float]] = {}
    heap: list[tuple[float, tuple[int, ...], tuple[int, ...], Cell, Cell]] = []

    def refresh(saddle: Cell) -> None:
        sides, cands = _side_candidates(cx, pairing, critical, saddle)
        cells = {saddle} | {c for side in sides for c in side}
        info[saddle] = (sides, cells)
        cand[saddle] = cands
        for v, diff in cands.items():
            heapq.heappush(
                heap, (diff, cx.cell_key(saddle), cx.cell_key(v), saddle, v)
            )

    for s in saddles:
        refresh(s)

    order: list[Cell] = []
    pers: dict[Cell, float] = {}
    while heap:
        diff, _, _, e, v = heapq.heappop(heap)
        if e not in critical or v not in critical:
            continue
        if cand.get(e, {}).get(v) != diff:
            continue
        sides, _ = info[e]
        side = sides[0] if sides[0][-1] == v else sides[1]
        # reverse the V-path: [e, u1, e1, u2, ..., uk=v] becomes
        # u1->e, u2->e1, ..., uk->e_{k-1}
        us = side[1::2]
        es = (e,) + side[2::2]
        for u in us:
            pairing.pop(u, None)
        for u, ed in zip(us, es):
            pairing[u] = ed
        critical.discard(e)
        critical.discard(v)
        pers[e] = diff
        order.append(e)
        del info[e]
        del cand[e]

        dirty = set(side)
        for e2 in list(info):
            _, cells2 = info[e2]
            if cells2 & dirty:
                refresh(e2)

    remaining = sorted((s for s in saddles if s not in pers), key=cx.cell_key)
    branches = []
    for i, s in enumerate(order + remaining):
        br = base[s]
        br.id = i
        br.persistence = pers.get(s, INF_PERSISTENCE)
        branches.append(br)
    return branches


def extract_morse_complex(field: ScalarField2D) -> SkeletonFamily:
    """The complete branch family of a likelihood map.

    The field is negated internally (exactly once) so the bright curvilinear
    ridges become the structures the saddle paths connect; persistences are
    value differences and therefore already live on the original scale.
    """
    g = -field.values
    cx = build_complex(g)
    dgf = build_gradient(cx)
    branches = compute_branch_persistence(dgf, cx)
    return SkeletonFamily.from_branches(field.width, field.height, branches)
