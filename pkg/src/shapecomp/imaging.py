"""Images on a grid and the Chan-Vese inhomogeneity field.

The field driving every objective in this package is

    delta(x) = sum_c (u_c(x) - u_in_c)**2 - (u_c(x) - u_out_c)**2,

negative where a cell looks like the object and positive where it looks
like the background.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError
from .grid import Grid


@dataclass(frozen=True, eq=False)
class Image:
    """Per-cell, per-channel intensities; ``values`` has shape (N, channels)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        elif vals.ndim != 2:
            vals = vals.reshape(self.grid.size, -1)
        if vals.shape[0] != self.grid.size:
            raise DimensionMismatchError(
                f"image has {vals.shape[0]} cells, grid has {self.grid.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("image values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_array(cls, array, spacing=None) -> "Image":
        """Build from a (d0, d1[, d2]) grayscale or (d0, d1[, d2], C) array.

        A trailing axis of length 3 on a 3-axis array is read as RGB channels.
        """
        arr = np.asarray(array, dtype=float)
        if arr.ndim == 2 or (arr.ndim == 3 and arr.shape[-1] not in (1, 3)):
            grid = Grid(arr.shape, spacing)
            return cls(grid, arr.reshape(-1, 1))
        grid = Grid(arr.shape[:-1], spacing)
        return cls(grid, arr.reshape(grid.size, arr.shape[-1]))

    @property
    def channels(self) -> int:
        return int(self.values.shape[1])

    def to_array(self) -> np.ndarray:
        if self.channels == 1:
            return self.values[:, 0].reshape(self.grid.dims)
        return self.values.reshape(*self.grid.dims, self.channels)


@dataclass(frozen=True, eq=False)
class DeltaField:
    grid: Grid
    delta: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=float).ravel().copy()
        if d.size != self.grid.size:
            raise DimensionMismatchError(f"delta has {d.size} entries, grid has {self.grid.size}")
        if not np.all(np.isfinite(d)):
            raise ValueError("delta must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "delta", d)

    def to_array(self) -> np.ndarray:
        return self.delta.reshape(self.grid.dims)


def kmeans2(image: Image, max_iters: int = 100, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Binary k-means on cell intensity vectors.

    Centroids start at the per-channel minimum and maximum. Returns
    ``(u_in, u_out)`` where `u_in` is the centroid of the smaller cluster
    (the object is assumed to occupy the minority of the domain). On a size
    tie the cluster seeded from the maximum is taken as the object.
    """
    x = image.values
    lo, hi = x.min(axis=0), x.max(axis=0)
    if np.all(lo == hi):
        raise DegenerateInputError("image is constant; k-means is undefined")
    rng = np.random.default_rng(seed)
    cent = np.stack([lo, hi])
    labels = None
    for _ in range(max(1, int(max_iters))):
        dist = ((x[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(dist, axis=1)
        for k in (0, 1):
            if not np.any(new == k):
                # reseed an empty cluster at a farthest point (ties broken by seed)
                far = dist[:, 1 - k]
                cand = np.flatnonzero(far == far.max())
                new[rng.choice(cand)] = k
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        cent = np.stack([x[labels == k].mean(axis=0) for k in (0, 1)])
    counts = np.bincount(labels, minlength=2)
    fg = 0 if counts[0] < counts[1] else 1
    return cent[fg].copy(), cent[1 - fg].copy()


def chan_vese_delta(image: Image, u_in, u_out) -> DeltaField:
    u_in = np.atleast_1d(np.asarray(u_in, dtype=float))
    u_out = np.atleast_1d(np.asarray(u_out, dtype=float))
    if u_in.shape != (image.channels,) or u_out.shape != (image.channels,):
        raise DimensionMismatchError("centroids must have one entry per channel")
    pi_in = ((image.values - u_in) ** 2).sum(axis=1)
    pi_ex = ((image.values - u_out) ** 2).sum(axis=1)
    return DeltaField(image.grid, pi_in - pi_ex)


def add_gaussian_noise(image: Image, snr_db: float, seed: int = 0) -> Image:
    """Add white Gaussian noise at a given SNR, independently per channel.

    Signal power is the per-channel mean square. ``snr_db = inf`` returns an
    unchanged copy. Values are not clipped.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return Image(image.grid, image.values)
    power = np.mean(image.values ** 2, axis=0)
    if np.any(power == 0):
        raise DegenerateInputError("cannot set an SNR on an all-zero channel")
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(image.values.shape) * sigma
    return Image(image.grid, image.values + noise)
