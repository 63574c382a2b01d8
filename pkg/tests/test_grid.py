import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapecomp.errors import DimensionMismatchError, EmptyMaskError, GridMismatchError
from shapecomp.grid import Grid, ShapeMask, check_same_grid, mask_from_bitmap, rasterize_ellipsoid


def test_grid_rejects_1d_and_bad_spacing():
    with pytest.raises(DimensionMismatchError):
        Grid((4,))
    with pytest.raises(ValueError):
        Grid((2, 2), (1.0, 0.0))


def test_index_coords_roundtrip():
    g = Grid((3, 4, 5))
    idx = np.arange(g.size)
    assert np.array_equal(g.index(g.coords(idx)), idx)


def test_single_cell_disk():
    m = rasterize_ellipsoid(Grid((4, 4)), (1.5, 1.5), (0.6, 0.6))
    assert m.cells.tolist() == [Grid((4, 4)).index((1, 1))]


def test_disk_covering_domain():
    assert len(rasterize_ellipsoid(Grid((4, 4)), (1.5, 1.5), (10, 10))) == 16


def test_ellipse_point_symmetry():
    g = Grid((8, 8))
    a = rasterize_ellipsoid(g, (3.5, 3.5), (2.0, 1.0), 0.0)
    b = rasterize_ellipsoid(g, (3.5, 3.5), (2.0, 1.0), np.pi)
    assert np.array_equal(a.cells, b.cells)


def test_empty_ellipse_raises():
    with pytest.raises(EmptyMaskError):
        rasterize_ellipsoid(Grid((4, 4)), (0.0, 0.0), (0.1, 0.1))
    with pytest.raises(ValueError):
        rasterize_ellipsoid(Grid((4, 4)), (50.0, 50.0), (1.0, 1.0))


def test_bitmap_examples():
    g = Grid((3, 3))
    assert mask_from_bitmap(g, [[1]], (0, 0)).cells.tolist() == [0]
    assert mask_from_bitmap(g, [[1, 1]], (0, 2)).cells.tolist() == [2]
    assert mask_from_bitmap(g, np.ones((3, 3)), (0, 0)).cells.tolist() == list(range(9))


def test_volume_uses_cell_volume():
    g = Grid((2, 2), (0.5, 2.0))
    assert ShapeMask.from_cells(g, [0, 3]).volume == pytest.approx(2.0)


def test_grid_mismatch():
    a, b = Grid((2, 2)), Grid((2, 3))
    with pytest.raises(GridMismatchError):
        check_same_grid(ShapeMask.from_cells(a, [0]), ShapeMask.from_cells(b, [0]))


@settings(max_examples=60, deadline=None)
@given(cx=st.floats(0.5, 9.5), cy=st.floats(0.5, 9.5), r=st.floats(0.6, 4.0))
def test_disk_cells_inside_radius(cx, cy, r):
    g = Grid((10, 10))
    try:
        m = rasterize_ellipsoid(g, (cx, cy), (r, r))
    except EmptyMaskError:
        return
    centers = g.centers()
    inside = np.sum((centers - [cx, cy]) ** 2, axis=1) <= r * r + 1e-9
    assert np.array_equal(m.to_bool(), inside)


@settings(max_examples=40, deadline=None)
@given(cells=st.sets(st.integers(0, 47), min_size=1))
def test_mask_bool_roundtrip(cells):
    g = Grid((6, 8))
    m = ShapeMask.from_cells(g, sorted(cells))
    assert np.array_equal(ShapeMask.from_bool(g, m.to_bool()).cells, m.cells)
