"""Minimal Netpbm (PGM/PPM) and raw-volume readers and writers."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import FormatError
from .grid import Grid
from .imaging import Image

_MAGIC = {b"P2": (1, False), b"P5": (1, True), b"P3": (3, False), b"P6": (3, True)}


def _tokens(data: bytes, count: int, pos: int):
    out = []
    while len(out) < count:
        m = re.compile(rb"\s*(#[^\n]*\n\s*)*").match(data, pos)
        pos = m.end()
        t = re.compile(rb"\S+").match(data, pos)
        if t is None:
            raise FormatError("truncated Netpbm header")
        out.append(t.group())
        pos = t.end()
    return out, pos


def read_pnm(path, spacing=None) -> Image:
    """Read a P2/P5/P3/P6 file into an :class:`Image` scaled to [0, 1]."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in _MAGIC:
        raise FormatError(f"{path}: not a PGM/PPM file")
    channels, binary = _MAGIC[magic]
    (w, h, maxval), pos = _tokens(data, 3, 2)
    width, height, maxval = int(w), int(h), int(maxval)
    if maxval not in (255, 65535):
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    count = width * height * channels
    if binary:
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    else:
        raw = np.array(data[pos:].split()[:count], dtype=np.int64)
    if raw.size != count:
        raise FormatError(f"{path}: expected {count} samples, found {raw.size}")
    arr = raw.astype(float).reshape(height, width, channels) / maxval
    grid = Grid((height, width), spacing)
    return Image(grid, arr.reshape(grid.size, channels))


def write_pgm(path, array, maxval: int = 255) -> None:
    """Write a 2D array with values in [0, 1] as binary PGM (P5)."""
    arr = np.asarray(array, dtype=float)
    if arr.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    q = np.clip(np.rint(arr * maxval), 0, maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode()
    Path(path).write_bytes(header + q.astype(dtype).tobytes())


def write_ppm(path, array, maxval: int = 255) -> None:
    """Write an (H, W, 3) array with values in [0, 1] as binary PPM (P6)."""
    arr = np.asarray(array, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("PPM needs an (H, W, 3) array")
    q = np.clip(np.rint(arr * maxval), 0, maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P6\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode()
    Path(path).write_bytes(header + q.astype(dtype).tobytes())


def read_volume(path) -> Image:
    """Raw volume: text line ``nx ny nz dx dy dz`` then little-endian float32 data (C order)."""
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing volume header")
    fields = data[:nl].split()
    if len(fields) != 6:
        raise FormatError(f"{path}: header must be 'nx ny nz dx dy dz'")
    dims = tuple(int(f) for f in fields[:3])
    spacing = tuple(float(f) for f in fields[3:])
    grid = Grid(dims, spacing)
    vals = np.frombuffer(data, dtype="<f4", offset=nl + 1)
    if vals.size != grid.size:
        raise FormatError(f"{path}: expected {grid.size} voxels, found {vals.size}")
    return Image(grid, vals.astype(float))


def write_volume(path, image: Image) -> None:
    g = image.grid
    if g.ndim != 3 or image.channels != 1:
        raise ValueError("volume files hold single-channel 3D images")
    header = " ".join([*(str(d) for d in g.dims), *(repr(s) for s in g.spacing)]) + "\n"
    Path(path).write_bytes(header.encode() + image.values[:, 0].astype("<f4").tobytes())
