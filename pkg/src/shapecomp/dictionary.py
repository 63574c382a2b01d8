"""Shape dictionaries.

Two builders are provided: regular-lattice families of parametric shapes,
and a correlation-sampled glyph dictionary for character recognition where
poses are drawn from a density that favours locations with low energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, DimensionMismatchError, EmptyDictionaryError, EmptyMaskError
from .grid import Grid, ShapeMask, check_same_grid, mask_from_bitmap, rasterize_ellipsoid
from .imaging import DeltaField


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Ordered list of shapes; position ``j`` is the shape's index everywhere downstream.

    ``meta[j]`` is a dict with at least ``family`` (str) and ``pose`` (dict).
    """

    grid: Grid
    shapes: tuple[ShapeMask, ...]
    meta: tuple[dict, ...] = None  # type: ignore[assignment]
    count_before_drop: int | None = None

    def __post_init__(self):
        shapes = tuple(self.shapes)
        if not shapes:
            raise EmptyDictionaryError("dictionary has no shapes")
        for s in shapes:
            check_same_grid(self.grid, s)
            if s.is_empty:
                raise EmptyMaskError("dictionary shapes must be nonempty")
        meta = self.meta
        if meta is None:
            meta = tuple({"family": "shape", "pose": {}} for _ in shapes)
        meta = tuple(dict(m) for m in meta)
        if len(meta) != len(shapes):
            raise DimensionMismatchError("meta must have one record per shape")
        object.__setattr__(self, "shapes", shapes)
        object.__setattr__(self, "meta", meta)
        if self.count_before_drop is None:
            object.__setattr__(self, "count_before_drop", len(shapes))

    def __len__(self) -> int:
        return len(self.shapes)

    def __getitem__(self, j) -> ShapeMask:
        return self.shapes[j]

    @property
    def n_shapes(self) -> int:
        return len(self.shapes)

    def subset(self, indices) -> "Dictionary":
        idx = [int(j) for j in indices]
        return Dictionary(self.grid, tuple(self.shapes[j] for j in idx), tuple(self.meta[j] for j in idx))

    def membership(self):
        """Sparse N x n_s 0/1 membership matrix (CSC)."""
        from scipy import sparse

        indptr = np.zeros(len(self.shapes) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(s) for s in self.shapes])
        rows = np.concatenate([s.cells for s in self.shapes])
        data = np.ones(rows.size)
        return sparse.csc_matrix((data, rows, indptr), shape=(self.grid.size, len(self.shapes)))


# --- templates and lattices -------------------------------------------------


@dataclass(frozen=True)
class EllipseTemplate:
    """Ellipse (2D) or ellipsoid (3D) with fixed semi-axes, placed at lattice points."""

    semi_axes: tuple[float, ...]
    angle: float = 0.0
    name: str = "ellipse"

    def place(self, grid: Grid, center) -> ShapeMask:
        return rasterize_ellipsoid(grid, center, self.semi_axes, self.angle)

    def pose(self, center) -> dict:
        return {"center": [float(c) for c in center], "semi_axes": [float(s) for s in self.semi_axes],
                "angle": float(self.angle)}


@dataclass(frozen=True)
class BitmapTemplate:
    """Binary bitmap placed with its central cell (``shape // 2``) on a lattice point."""

    bitmap: np.ndarray = field(repr=False, hash=False, compare=False)
    name: str = "bitmap"

    def place(self, grid: Grid, center) -> ShapeMask:
        bm = np.asarray(self.bitmap, dtype=bool)
        cell = np.floor(np.asarray(center, dtype=float) / np.asarray(grid.spacing)).astype(np.int64)
        return mask_from_bitmap(grid, bm, cell - np.asarray(bm.shape) // 2)

    def pose(self, center) -> dict:
        return {"center": [float(c) for c in center]}


def regular_lattice(grid: Grid, counts: Sequence[int]) -> np.ndarray:
    """``counts[k]`` evenly spaced points per axis, each at the middle of its slab.

    Returns an array of physical coordinates with shape (prod(counts), ndim).
    """
    counts = [int(c) for c in counts]
    if len(counts) != grid.ndim:
        raise DimensionMismatchError("lattice counts must match grid dimension")
    if any(c < 1 for c in counts):
        raise ValueError("each lattice axis needs at least one point")
    axes = [(np.arange(c) + 0.5) * (ext / c) for c, ext in zip(counts, grid.extent)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_grid_dictionary(grid: Grid, families) -> Dictionary:
    """One shape per (family, lattice point).

    Parameters
    ----------
    families : iterable of (template, lattice)
        `template` has ``place(grid, center)`` and ``pose(center)``; `lattice`
        is an (m, ndim) array of centers or a per-axis count sequence passed
        to :func:`regular_lattice`.

    Shapes whose rasterization is empty are dropped; the pre-drop count is
    kept in ``count_before_drop``.
    """
    shapes, meta = [], []
    total = 0
    for template, lattice in families:
        pts = np.asarray(lattice, dtype=float)
        if pts.ndim == 1:
            pts = regular_lattice(grid, pts.astype(int))
        if pts.shape[0] < 1:
            raise ValueError("lattice has no points")
        for center in pts:
            total += 1
            try:
                mask = template.place(grid, center)
            except EmptyMaskError:
                continue
            shapes.append(mask)
            meta.append({"family": template.name, "pose": template.pose(center)})
    if not shapes:
        raise EmptyDictionaryError(f"all {total} dictionary shapes were empty")
    return Dictionary(grid, tuple(shapes), tuple(meta), count_before_drop=total)


# --- correlation-sampled dictionaries ---------------------------------------


def template_kernel(template) -> np.ndarray:
    """Boolean kernel from a bitmap or from the bounding box of a ShapeMask."""
    if isinstance(template, ShapeMask):
        coords = template.grid.coords(template.cells)
        lo = coords.min(axis=0)
        kern = np.zeros(tuple(coords.max(axis=0) - lo + 1), dtype=bool)
        kern[tuple((coords - lo).T)] = True
        return kern
    return np.asarray(template, dtype=bool)


def correlation_field(delta: DeltaField, template) -> np.ndarray:
    """``field[c] = sum of -delta over the template centered at c`` (zero padded).

    The template center is the kernel entry at index ``shape // 2``. The
    value is ``-E(S)`` for the shape obtained by placing the template at `c`,
    without the cell-volume factor. Returned as a flat per-cell array.
    """
    kern = template_kernel(template)
    if kern.ndim != delta.grid.ndim:
        raise DimensionMismatchError("template dimension does not match grid")
    if any(k > d for k, d in zip(kern.shape, delta.grid.dims)):
        raise DimensionMismatchError("template is larger than the grid")
    out = ndimage.correlate(-delta.to_array(), kern.astype(float), mode="constant", cval=0.0)
    return out.ravel()


def smooth_round(values, eps_r: float) -> np.ndarray:
    """Min-max normalize then apply ``r(z) = 0.5 + arctan((z - 0.5) / eps_r) / pi``."""
    if not eps_r > 0:
        raise ValueError("eps_r must be positive")
    z = np.asarray(values, dtype=float)
    lo, hi = z.min(), z.max()
    if hi == lo:
        raise DegenerateInputError("cannot normalize a constant field")
    z = (z - lo) / (hi - lo)
    return 0.5 + np.arctan((z - 0.5) / eps_r) / np.pi


@dataclass(frozen=True, eq=False)
class PlacementPdf:
    grid: Grid
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != self.grid.size:
            raise DimensionMismatchError("pdf size does not match grid")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("pdf weights must be finite and nonnegative")
        s = w.sum()
        if s <= 0:
            raise ValueError("pdf has no mass")
        w = w / s
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def pdf_from_field(grid: Grid, values, offset_frac: float = 1e-6) -> PlacementPdf:
    """Shift a field to be strictly positive and normalize it to a pdf."""
    v = np.asarray(values, dtype=float).ravel()
    lo, rng = v.min(), np.ptp(v)
    off = offset_frac * rng if rng > 0 else 1.0
    return PlacementPdf(grid, v - lo + off)


def sample_centroids(pdf: PlacementPdf, count: int, seed: int = 0) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    return rng.choice(pdf.grid.size, size=int(count), p=pdf.weights)


def excess_kurtosis(values) -> float:
    x = np.asarray(values, dtype=float).ravel()
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        raise DegenerateInputError("kurtosis of a constant field is undefined")
    return float(np.mean(d ** 4) / m2 ** 2 - 3.0)


def rotate_bitmap(bitmap, degrees: float) -> np.ndarray:
    """Nearest-neighbour rotation of a binary bitmap, trimmed to its bounding box."""
    bm = np.asarray(bitmap, dtype=bool)
    if degrees % 360 == 0:
        return bm.copy()
    rot = ndimage.rotate(bm.astype(np.uint8), degrees, order=0, reshape=True, mode="constant") > 0
    rows = np.flatnonzero(rot.any(axis=1))
    cols = np.flatnonzero(rot.any(axis=0))
    return rot[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]


def build_ocr_dictionary(
    delta: DeltaField,
    glyphs: Mapping[str, np.ndarray],
    samples: int = 50,
    top_k: int = 10,
    eps_r: float = 0.1,
    angles: Sequence[float] = (-15.0, 0.0, 15.0),
    seed: int = 0,
    boost: Mapping[str, int] | None = None,
) -> Dictionary:
    """Correlation-sampled glyph dictionary.

    For every (glyph, rotation) element the correlation field with ``-delta``
    is smoothly rounded, turned into a pdf and sampled for `samples`
    centers. The `top_k` elements with the most peaked pdf (largest excess
    kurtosis of the weights) get twice as many samples. `boost` optionally
    multiplies the sample count of selected letters. Duplicate poses are
    dropped. Meta records hold ``family=<letter>`` and the pose
    ``{"angle", "center"}`` with `center` in cell coordinates.
    """
    grid = delta.grid
    if grid.ndim != 2:
        raise DimensionMismatchError("glyph dictionaries are 2D")
    elements = []
    for letter in sorted(glyphs):
        for ang in angles:
            bm = rotate_bitmap(glyphs[letter], ang)
            fld = correlation_field(delta, bm)
            try:
                pdf = pdf_from_field(grid, smooth_round(fld, eps_r))
            except DegenerateInputError:
                pdf = PlacementPdf(grid, np.ones(grid.size))
            kurt = excess_kurtosis(pdf.weights) if np.ptp(pdf.weights) > 0 else -np.inf
            elements.append((letter, float(ang), bm, pdf, kurt))

    order = sorted(range(len(elements)), key=lambda e: (-elements[e][4], e))
    boosted = set(order[:max(0, int(top_k))])
    boost = dict(boost or {})

    shapes, meta, seen = [], [], set()
    total = 0
    for e, (letter, ang, bm, pdf, _) in enumerate(elements):
        n = samples * (2 if e in boosted else 1) * int(boost.get(letter, 1))
        centers = sample_centroids(pdf, n, seed=seed + 7919 * e)
        half = np.asarray(bm.shape) // 2
        for c in centers:
            total += 1
            coord = tuple(int(v) for v in grid.coords(int(c)))
            key = (letter, ang, coord)
            if key in seen:
                continue
            seen.add(key)
            try:
                mask = mask_from_bitmap(grid, bm, np.asarray(coord) - half)
            except EmptyMaskError:
                continue
            shapes.append(mask)
            meta.append({"family": letter, "pose": {"angle": ang, "center": list(coord)}})
    if not shapes:
        raise EmptyDictionaryError("no glyph poses were generated")
    return Dictionary(grid, tuple(shapes), tuple(meta), count_before_drop=total)


def glyph_width(glyphs: Mapping[str, np.ndarray]) -> int:
    return max(np.asarray(g).shape[1] for g in glyphs.values())

