import numpy as np
import pytest

from structseg.cubical import Cell, build_complex
from structseg.errors import EmptyField, OutOfBounds

from conftest import random_field


def test_cell_dim_from_parity():
    assert Cell(0, 0).dim == 0
    assert Cell(1, 0).dim == 1
    assert Cell(0, 1).dim == 1
    assert Cell(1, 1).dim == 2


@pytest.mark.parametrize(
    "w,h,expected",
    [(1, 1, (1, 0, 0)), (2, 2, (4, 4, 1)), (3, 2, (6, 7, 2)), (5, 4, (20, 31, 12))],
)
def test_cell_counts(w, h, expected):
    cx = build_complex(np.zeros((h, w)))
    assert cx.n_cells() == expected
    # Euler characteristic of a full grid
    v, e, f = cx.n_cells()
    assert v - e + f == 1


def test_empty_field_rejected():
    with pytest.raises(EmptyField):
        build_complex(np.zeros((0, 3)))


def test_square_faces_are_four_edges():
    cx = build_complex(np.zeros((2, 2)))
    faces = cx.faces(Cell(1, 1))
    assert sorted(faces) == sorted([Cell(1, 0), Cell(1, 2), Cell(0, 1), Cell(2, 1)])


def test_corner_vertex_cofaces():
    cx = build_complex(np.zeros((2, 2)))
    assert sorted(cx.cofaces(Cell(0, 0))) == sorted([Cell(1, 0), Cell(0, 1)])


def test_vertex_has_no_faces():
    cx = build_complex(np.zeros((3, 3)))
    assert cx.faces(Cell(2, 2)) == []


def test_out_of_bounds():
    cx = build_complex(np.zeros((2, 2)))
    with pytest.raises(OutOfBounds):
        cx.faces(Cell(4, 0))
    with pytest.raises(OutOfBounds):
        cx.lower_star(Cell(0, 6))


def test_faces_cofaces_mutual():
    cx = build_complex(random_field(3, 5, 4).values)
    for cell in cx.iter_cells():
        for f in cx.faces(cell):
            assert cell in cx.cofaces(f)
        for c in cx.cofaces(cell):
            assert cell in cx.faces(c)


def test_lower_star_of_global_minimum_is_singleton():
    field = random_field(11, 4, 4)
    cx = build_complex(field.values)
    flat = field.values.ravel()
    y, x = divmod(int(np.argmin(flat)), 4)
    assert cx.lower_star(Cell(2 * x, 2 * y)) == [Cell(2 * x, 2 * y)]


def test_lower_star_of_maximum_in_2x2():
    vals = np.array([[0.1, 0.4], [0.2, 0.9]])
    cx = build_complex(vals)
    star = cx.lower_star(Cell(2, 2))
    dims = sorted(c.dim for c in star)
    assert dims == [0, 1, 1, 2]


def test_lower_stars_partition_cells():
    field = random_field(23, 4, 4)
    cx = build_complex(field.values)
    seen = {}
    for v in cx.iter_vertices():
        for cell in cx.lower_star(v):
            assert cell not in seen, f"{cell} in two stars"
            seen[cell] = v
    n_cells = sum(cx.n_cells())
    assert len(seen) == n_cells


def test_lower_star_requires_vertex():
    cx = build_complex(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        cx.lower_star(Cell(1, 0))


def test_total_order_strict():
    # constant field: ranks all distinct via row-major tie-break
    cx = build_complex(np.full((3, 3), 0.5))
    ranks = sorted(cx.rank_of_vertex(v) for v in cx.iter_vertices())
    assert ranks == list(range(9))
