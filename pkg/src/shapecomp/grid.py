"""Discrete cell grids and rasterized shape masks.

Cells are indexed 0..N-1 in row-major (C) order. A cell with integer
coordinate ``(i0, i1[, i2])`` has its center at ``(i0 + 0.5) * h0, ...``
in physical units, where ``h`` is the per-axis spacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptyMaskError, GridMismatchError


@dataclass(frozen=True)
class Grid:
    dims: tuple[int, ...]
    spacing: tuple[float, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise DimensionMismatchError(f"grid must be 2D or 3D, got dims={dims}")
        if any(d <= 0 for d in dims):
            raise ValueError(f"grid dims must be positive, got {dims}")
        spacing = self.spacing
        if spacing is None:
            spacing = (1.0,) * len(dims)
        spacing = tuple(float(s) for s in spacing)
        if len(spacing) != len(dims):
            raise DimensionMismatchError("spacing must have one entry per axis")
        if any(not np.isfinite(s) or s <= 0 for s in spacing):
            raise ValueError(f"spacing must be positive, got {spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(d * h for d, h in zip(self.dims, self.spacing))

    def index(self, coords) -> np.ndarray:
        """Row-major flat index of integer cell coordinates (last axis = coordinate)."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape[-1] != self.ndim:
            raise DimensionMismatchError("coordinate length does not match grid")
        return np.ravel_multi_index(tuple(np.moveaxis(coords, -1, 0)), self.dims)

    def coords(self, index) -> np.ndarray:
        idx = np.asarray(index, dtype=np.int64)
        return np.stack(np.unravel_index(idx, self.dims), axis=-1)

    def centers(self) -> np.ndarray:
        """Physical cell centers, shape (N, ndim)."""
        axes = [(np.arange(d) + 0.5) * h for d, h in zip(self.dims, self.spacing)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def reshape(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.dims)


@dataclass(frozen=True, eq=False)
class ShapeMask:
    """A set of grid cells, stored as a strictly increasing index array.

    Construction through :func:`rasterize_ellipsoid`, :func:`mask_from_bitmap`
    or :meth:`from_cells` rejects empty sets. The only empty masks in
    circulation come from set arithmetic (``realize``) and are flagged by
    :attr:`is_empty`.
    """

    grid: Grid
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64).ravel()
        if cells.size:
            if cells[0] < 0 or cells[-1] >= self.grid.size:
                raise IndexError("cell index out of range for grid")
            if np.any(np.diff(cells) <= 0):
                raise ValueError("cells must be strictly increasing")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_cells(cls, grid: Grid, cells, allow_empty: bool = False) -> "ShapeMask":
        cells = np.unique(np.asarray(cells, dtype=np.int64).ravel())
        if cells.size == 0 and not allow_empty:
            raise EmptyMaskError("shape mask is empty")
        return cls(grid, cells)

    @classmethod
    def from_bool(cls, grid: Grid, flags, allow_empty: bool = False) -> "ShapeMask":
        flags = np.asarray(flags, dtype=bool).ravel()
        if flags.size != grid.size:
            raise DimensionMismatchError("boolean mask size does not match grid")
        return cls.from_cells(grid, np.flatnonzero(flags), allow_empty=allow_empty)

    @property
    def is_empty(self) -> bool:
        return self.cells.size == 0

    @property
    def volume(self) -> float:
        return self.cells.size * self.grid.cell_volume

    def __len__(self) -> int:
        return int(self.cells.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShapeMask):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.grid, self.cells.tobytes()))

    def to_bool(self) -> np.ndarray:
        flags = np.zeros(self.grid.size, dtype=bool)
        flags[self.cells] = True
        return flags

    def to_array(self) -> np.ndarray:
        return self.to_bool().reshape(self.grid.dims)


def check_same_grid(*items) -> Grid:
    grids = [it if isinstance(it, Grid) else it.grid for it in items]
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {g}")
    return first


def _rotation(ndim: int, angle: float) -> np.ndarray:
    # rotation in the (axis 0, axis 1) plane; axis 2 (if any) is the rotation axis
    c, s = np.cos(angle), np.sin(angle)
    rot = np.eye(ndim)
    rot[:2, :2] = [[c, -s], [s, c]]
    return rot


def rasterize_ellipsoid(
    grid: Grid,
    center: Sequence[float],
    semi_axes: Sequence[float],
    angle: float = 0.0,
) -> ShapeMask:
    """Cells whose centers lie inside a rotated ellipse (2D) or ellipsoid (3D).

    The ellipsoid has semi-axis ``semi_axes[k]`` along its k-th body axis;
    body axes are the grid axes rotated by `angle` (radians) in the plane of
    grid axes 0 and 1. Shapes reaching past the border are clipped.
    """
    center = np.asarray(center, dtype=float)
    semi = np.asarray(semi_axes, dtype=float)
    if center.shape != (grid.ndim,) or semi.shape != (grid.ndim,):
        raise DimensionMismatchError("center and semi_axes must match grid dimension")
    if np.any(semi <= 0) or not np.all(np.isfinite(semi)):
        raise ValueError("semi_axes must be strictly positive")
    if np.any(center < 0) or np.any(center > np.asarray(grid.extent)):
        raise ValueError("center lies outside the grid bounding box")

    # restrict the test to the bounding box of the circumscribed sphere
    reach = semi.max()
    lo, hi = [], []
    for k, (d, h) in enumerate(zip(grid.dims, grid.spacing)):
        lo.append(max(0, int(np.floor((center[k] - reach) / h - 0.5))))
        hi.append(min(d, int(np.ceil((center[k] + reach) / h - 0.5)) + 1))
    axes = [(np.arange(a, b) + 0.5) * h for a, b, h in zip(lo, hi, grid.spacing)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1) - center
    body = pts @ _rotation(grid.ndim, angle)
    inside = np.sum((body / semi) ** 2, axis=1) <= 1.0 + 1e-12
    if not np.any(inside):
        raise EmptyMaskError("no cell center falls inside the ellipsoid")
    local = np.stack(np.unravel_index(np.flatnonzero(inside), [b - a for a, b in zip(lo, hi)]), axis=1)
    return ShapeMask.from_cells(grid, grid.index(local + np.asarray(lo)))


def mask_from_bitmap(grid: Grid, bitmap, offset: Sequence[int] | None = None) -> ShapeMask:
    """Place a binary bitmap with its ``[0, 0(, 0)]`` entry at `offset`.

    Offsets may be negative; whatever falls outside the grid is clipped.
    """
    bitmap = np.asarray(bitmap).astype(bool)
    if bitmap.ndim != grid.ndim:
        raise DimensionMismatchError("bitmap dimension does not match grid")
    offset = np.zeros(grid.ndim, dtype=np.int64) if offset is None else np.asarray(offset, dtype=np.int64)
    if offset.shape != (grid.ndim,):
        raise DimensionMismatchError("offset length does not match grid")
    pos = np.argwhere(bitmap) + offset
    keep = np.all((pos >= 0) & (pos < np.asarray(grid.dims)), axis=1)
    if not np.any(keep):
        raise EmptyMaskError("bitmap lies entirely outside the grid")
    return ShapeMask.from_cells(grid, grid.index(pos[keep]))
