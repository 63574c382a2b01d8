"""Text artifact formats used by the command line.

DELTA1 (per-cell delta field)::

    DELTA1
    dims 4
    spacing 1.0
    -1.0
    1.0
    ...            one value per cell, C order

DICT1 (shape dictionary)::

    DICT1 <n_shapes>
    dims <d0> <d1> ...
    spacing <h0> <h1> ...
    <meta as one-line JSON>
    <start> <length> <start> <length> ...   runs of consecutive cells
    ...            (meta line, runs line) per shape

Alpha vectors are CSV with header ``index,value``. A composition file has two
lines, the I+ indices and the I- indices, each comma separated (possibly
empty). ``run.meta`` and config files are ``key = value`` lines; ``#`` starts
a comment.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .composer import Composition
from .dictionary import Dictionary
from .errors import FormatError
from .grid import Grid, ShapeMask
from .imaging import DeltaField


def _num(v: float) -> str:
    return repr(float(v))


def _read_lines(path) -> list[str]:
    return Path(path).read_text().splitlines()


def _grid_lines(grid: Grid) -> list[str]:
    return ["dims " + " ".join(str(d) for d in grid.dims),
            "spacing " + " ".join(_num(h) for h in grid.spacing)]


def _parse_grid(lines, path) -> Grid:
    try:
        k0, *dims = lines[0].split()
        k1, *sp = lines[1].split()
        if k0 != "dims" or k1 != "spacing":
            raise ValueError
        return Grid(tuple(int(d) for d in dims), tuple(float(h) for h in sp))
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad grid header") from exc


# --- delta -------------------------------------------------------------------


def write_delta(path, delta: DeltaField) -> None:
    lines = ["DELTA1", *_grid_lines(delta.grid), *(_num(v) for v in delta.delta)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_delta(path) -> DeltaField:
    lines = [ln for ln in _read_lines(path) if ln.strip()]
    if not lines or lines[0].strip() != "DELTA1":
        raise FormatError(f"{path}: not a DELTA1 file")
    grid = _parse_grid(lines[1:3], path)
    try:
        vals = np.array([float(v) for v in lines[3:]])
    except ValueError as exc:
        raise FormatError(f"{path}: bad delta value") from exc
    if vals.size != grid.size:
        raise FormatError(f"{path}: expected {grid.size} values, found {vals.size}")
    return DeltaField(grid, vals)


# --- dictionary ----------------------------------------------------------------


def encode_runs(cells) -> np.ndarray:
    """Sorted cell indices as (start, length) pairs, flattened."""
    cells = np.asarray(cells, dtype=np.int64)
    if cells.size == 0:
        return np.zeros(0, dtype=np.int64)
    breaks = np.flatnonzero(np.diff(cells) != 1) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [cells.size]))
    return np.column_stack((cells[starts], ends - starts)).ravel()


def decode_runs(runs) -> np.ndarray:
    runs = np.asarray(runs, dtype=np.int64).reshape(-1, 2)
    if runs.size == 0:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([np.arange(s, s + n) for s, n in runs])


def write_dictionary(path, dictionary: Dictionary) -> None:
    lines = [f"DICT1 {dictionary.n_shapes}", *_grid_lines(dictionary.grid)]
    for shape, meta in zip(dictionary.shapes, dictionary.meta):
        lines.append(json.dumps(meta, sort_keys=True, separators=(",", ":")))
        lines.append(" ".join(str(int(v)) for v in encode_runs(shape.cells)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_dictionary(path) -> Dictionary:
    lines = _read_lines(path)
    head = lines[0].split() if lines else []
    if len(head) != 2 or head[0] != "DICT1":
        raise FormatError(f"{path}: not a DICT1 file")
    n = int(head[1])
    grid = _parse_grid(lines[1:3], path)
    body = lines[3:]
    if len(body) < 2 * n:
        raise FormatError(f"{path}: expected {n} shapes")
    shapes, meta = [], []
    for j in range(n):
        try:
            meta.append(json.loads(body[2 * j]))
            runs = [int(v) for v in body[2 * j + 1].split()]
        except ValueError as exc:
            raise FormatError(f"{path}: bad record for shape {j}") from exc
        if len(runs) % 2:
            raise FormatError(f"{path}: odd run list for shape {j}")
        shapes.append(ShapeMask.from_cells(grid, decode_runs(runs)))
    return Dictionary(grid, tuple(shapes), tuple(meta))


# --- alpha and compositions ---------------------------------------------------------


def write_alpha(path, alpha) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value"])
        for j, v in enumerate(np.asarray(alpha, dtype=float)):
            w.writerow([j, _num(v)])


def read_alpha(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["index", "value"]:
        raise FormatError(f"{path}: missing 'index,value' header")
    entries = {}
    try:
        for r in rows[1:]:
            if r:
                entries[int(r[0])] = float(r[1])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad alpha row") from exc
    if sorted(entries) != list(range(len(entries))):
        raise FormatError(f"{path}: indices must be 0..n-1")
    return np.array([entries[j] for j in range(len(entries))])


def write_composition(path, comp: Composition) -> None:
    Path(path).write_text(",".join(map(str, comp.i_plus)) + "\n" + ",".join(map(str, comp.i_minus)) + "\n")


def read_composition(path) -> Composition:
    lines = _read_lines(path) + ["", ""]

    def idx(line):
        return tuple(int(t) for t in line.split(",") if t.strip())

    try:
        return Composition(idx(lines[0]), idx(lines[1]))
    except ValueError as exc:
        raise FormatError(f"{path}: bad composition") from exc


# --- key = value ----------------------------------------------------------------------


def parse_config(text: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"config line {n}: expected 'key = value'")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def read_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def write_config(path, entries: dict) -> None:
    lines = [f"{k} = {entries[k]}" for k in sorted(entries)]
    Path(path).write_text("\n".join(lines) + "\n")
