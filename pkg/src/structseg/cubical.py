"""Cubical complex view of a pixel grid.

A w*h image becomes a complex with cells addressed in the doubled grid:
pixel (x, y) is the vertex at (2x, 2y), edges sit at one odd coordinate,
squares at two odd coordinates. Cells are addressed arithmetically and never
materialized as a stored list, so megapixel inputs stay cheap.

The complex carries a strict total order on vertices (value, then row-major
index); a cell's value/rank is the max over the vertices in its closure
(lower-star convention).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import EmptyField, OutOfBounds
from .raster_io import ScalarField2D


class Cell(NamedTuple):
    """A cell in the doubled grid; dim = number of odd coordinates."""

    cx: int
    cy: int

    @property
    def dim(self) -> int:
        return (self.cx & 1) + (self.cy & 1)


@dataclass
class CubicalComplex:
    """Implicit complex over a value grid with a strict vertex order."""

    width: int
    height: int
    vertex_values: np.ndarray  # float64, shape (height, width)
    vertex_rank: np.ndarray  # int64, shape (height, width); ascending (value, index)

    @property
    def grid_w(self) -> int:
        return 2 * self.width - 1

    @property
    def grid_h(self) -> int:
        return 2 * self.height - 1

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell.cx < self.grid_w and 0 <= cell.cy < self.grid_h

    def _check(self, cell: Cell) -> None:
        if not self.in_bounds(cell):
            raise OutOfBounds(f"cell {cell} outside doubled grid "
                              f"[0,{self.grid_w - 1}]x[0,{self.grid_h - 1}]")

    def vertices_of(self, cell: Cell) -> list[Cell]:
        """Vertices in the closure of a cell."""
        self._check(cell)
        xs = (cell.cx,) if cell.cx % 2 == 0 else (cell.cx - 1, cell.cx + 1)
        ys = (cell.cy,) if cell.cy % 2 == 0 else (cell.cy - 1, cell.cy + 1)
        return [Cell(x, y) for y in ys for x in xs]

    def faces(self, cell: Cell) -> list[Cell]:
        """Codimension-1 faces: edge -> 2 vertices, square -> 4 edges."""
        self._check(cell)
        if cell.dim == 0:
            return []
        if cell.dim == 1:
            if cell.cx % 2 == 1:
                return [Cell(cell.cx - 1, cell.cy), Cell(cell.cx + 1, cell.cy)]
            return [Cell(cell.cx, cell.cy - 1), Cell(cell.cx, cell.cy + 1)]
        return [
            Cell(cell.cx, cell.cy - 1),
            Cell(cell.cx, cell.cy + 1),
            Cell(cell.cx - 1, cell.cy),
            Cell(cell.cx + 1, cell.cy),
        ]

    def cofaces(self, cell: Cell) -> list[Cell]:
        """Codimension-1 cofaces, truncated at the grid boundary."""
        self._check(cell)
        if cell.dim == 2:
            return []
        if cell.dim == 0:
            cand = [
                Cell(cell.cx - 1, cell.cy),
                Cell(cell.cx + 1, cell.cy),
                Cell(cell.cx, cell.cy - 1),
                Cell(cell.cx, cell.cy + 1),
            ]
        elif cell.cx % 2 == 1:  # horizontal edge -> squares above/below
            cand = [Cell(cell.cx, cell.cy - 1), Cell(cell.cx, cell.cy + 1)]
        else:  # vertical edge -> squares left/right
            cand = [Cell(cell.cx - 1, cell.cy), Cell(cell.cx + 1, cell.cy)]
        return [c for c in cand if self.in_bounds(c)]

    def rank_of_vertex(self, cell: Cell) -> int:
        return int(self.vertex_rank[cell.cy // 2, cell.cx // 2])

    def cell_rank(self, cell: Cell) -> int:
        """Rank of the cell's maximal vertex under the total order."""
        return max(self.rank_of_vertex(v) for v in self.vertices_of(cell))

    def cell_value(self, cell: Cell) -> float:
        """Max over vertex values in the closure (lower-star convention)."""
        self._check(cell)
        return max(
            float(self.vertex_values[v.cy // 2, v.cx // 2])
            for v in self.vertices_of(cell)
        )

    def cell_key(self, cell: Cell) -> tuple[int, ...]:
        """Vertex ranks sorted descending; lexicographic order on these keys
        is the strict total order used for lower-star processing."""
        return tuple(sorted((self.rank_of_vertex(v) for v in self.vertices_of(cell)),
                            reverse=True))

    def iter_vertices(self) -> Iterator[Cell]:
        for y in range(self.height):
            for x in range(self.width):
                yield Cell(2 * x, 2 * y)

    def iter_cells(self) -> Iterator[Cell]:
        for cy in range(self.grid_h):
            for cx in range(self.grid_w):
                yield Cell(cx, cy)

    def n_cells(self) -> tuple[int, int, int]:
        """(#vertices, #edges, #squares)."""
        w, h = self.width, self.height
        return w * h, w * (h - 1) + h * (w - 1), (w - 1) * (h - 1)

    def lower_star(self, vertex: Cell) -> list[Cell]:
        """All cells whose maximal vertex under the total order is ``vertex``."""
        if vertex.dim != 0:
            raise ValueError(f"lower_star expects a vertex, got dim {vertex.dim}")
        self._check(vertex)
        r = self.rank_of_vertex(vertex)
        star = [vertex]
        for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1),
                       (-1, -1), (1, -1), (-1, 1), (1, 1)):
            c = Cell(vertex.cx + dx, vertex.cy + dy)
            if self.in_bounds(c) and self.cell_rank(c) == r:
                star.append(c)
        return star


def build_complex(field: ScalarField2D | np.ndarray) -> CubicalComplex:
    """Build the implicit cubical complex of a field.

    Accepts a ScalarField2D or a bare 2D array (values need not be in [0, 1];
    the Morse layer feeds negated fields through here).
    """
    values = field.values if isinstance(field, ScalarField2D) else np.asarray(field)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:
        raise EmptyField("complex needs a non-empty 2D value grid")
    h, w = values.shape
    flat = values.ravel()
    order = np.lexsort((np.arange(flat.size), flat))
    rank = np.empty(flat.size, dtype=np.int64)
    rank[order] = np.arange(flat.size)
    return CubicalComplex(w, h, values, rank.reshape(h, w))
