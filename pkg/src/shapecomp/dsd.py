"""Disjoint shape decomposition.

Cells covered by at least one of the input shapes are grouped by their
membership signature; each group is a shapelet. The bearing matrix ``B``
holds one signature per row, so every input shape is the union of the
shapelets whose row has a 1 in its column, and ``beta = B @ alpha`` is the
value of ``L_alpha = sum_j alpha_j chi_{S_j}`` on each shapelet.

Shapelets are numbered in order of their smallest cell index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError
from .grid import Grid, ShapeMask, check_same_grid
from .imaging import DeltaField


@dataclass(frozen=True, eq=False)
class ShapeletDecomposition:
    grid: Grid
    shapelets: tuple[np.ndarray, ...] = field(repr=False)
    bearing: np.ndarray = field(repr=False)  # (n_omega, n) int8
    cell_shapelet: np.ndarray = field(repr=False)  # per grid cell, -1 when uncovered
    p: np.ndarray | None = field(default=None, repr=False)
    q: np.ndarray | None = field(default=None, repr=False)
    uncovered_constant: float = 0.0
    source_shape_ids: tuple[int, ...] | None = None

    @property
    def n_shapelets(self) -> int:
        return int(self.bearing.shape[0])

    @property
    def n_shapes(self) -> int:
        return int(self.bearing.shape[1])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.shapelets], dtype=np.int64)

    def shapelets_of(self, j: int) -> np.ndarray:
        """Shapelet indices making up input shape `j` (the set I_j)."""
        return np.flatnonzero(self.bearing[:, j])

    def reconstruct(self, j: int) -> np.ndarray:
        parts = [self.shapelets[i] for i in self.shapelets_of(j)]
        return np.sort(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)


def decompose(shapes: Sequence[ShapeMask], delta: DeltaField | None = None,
              source_ids: Sequence[int] | None = None) -> ShapeletDecomposition:
    """Group covered cells by membership signature.

    When `delta` is given, ``p_i = sum of max(delta, 0) * vol`` and
    ``q_i = sum of max(-delta, 0) * vol`` over each shapelet, and the
    constant ``sum of min(delta, 0) * vol`` over uncovered cells is kept for
    exact objective reconstruction.
    """
    shapes = list(shapes)
    if not shapes:
        raise ValueError("need at least one shape")
    grid = check_same_grid(*shapes)
    n = len(shapes)

    # sparse membership, one row per cell; the sorted column list is the signature
    counts = np.zeros(grid.size + 1, dtype=np.int64)
    rows = np.concatenate([s.cells for s in shapes])
    cols = np.concatenate([np.full(len(s), j, dtype=np.int64) for j, s in enumerate(shapes)])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    np.add.at(counts, rows + 1, 1)
    indptr = np.cumsum(counts)
    covered = np.flatnonzero(np.diff(indptr))

    groups: dict[bytes, int] = {}
    sig_cols: list[np.ndarray] = []
    members: list[list[int]] = []
    cell_shapelet = np.full(grid.size, -1, dtype=np.int64)
    for c in covered:
        sig = cols[indptr[c]:indptr[c + 1]]
        key = sig.tobytes()
        k = groups.get(key)
        if k is None:
            k = groups[key] = len(sig_cols)
            sig_cols.append(sig)
            members.append([])
        members[k].append(int(c))
        cell_shapelet[c] = k

    bearing = np.zeros((len(sig_cols), n), dtype=np.int8)
    for k, sig in enumerate(sig_cols):
        bearing[k, sig] = 1
    shapelets = tuple(np.asarray(m, dtype=np.int64) for m in members)
    for s in shapelets:
        s.setflags(write=False)
    bearing.setflags(write=False)
    cell_shapelet.setflags(write=False)

    p = q = None
    const = 0.0
    if delta is not None:
        check_same_grid(grid, delta)
        vol = grid.cell_volume
        d = delta.delta
        pos = np.maximum(d, 0.0) * vol
        neg = np.maximum(-d, 0.0) * vol
        p = np.array([pos[s].sum() for s in shapelets])
        q = np.array([neg[s].sum() for s in shapelets])
        const = float(np.sum(np.maximum(0.0, np.minimum(d[cell_shapelet < 0], 0.0) * vol)))
    ids = tuple(range(n)) if source_ids is None else tuple(int(j) for j in source_ids)
    return ShapeletDecomposition(grid, shapelets, bearing, cell_shapelet, p, q, const, ids)


def beta_of(decomp: ShapeletDecomposition, alpha) -> np.ndarray:
    alpha = np.asarray(getattr(alpha, "alpha", alpha), dtype=float).ravel()
    if alpha.size != decomp.n_shapes:
        raise DimensionMismatchError("alpha length must equal the number of decomposed shapes")
    return decomp.bearing.astype(float) @ alpha


def beta_objective(decomp: ShapeletDecomposition, beta, include_uncovered: bool = False) -> float:
    """``sum_i p_i max(beta_i, 0) - q_i min(beta_i, 1)``.

    With ``include_uncovered=True`` the uncovered-cell constant is added, which
    makes the value equal to the cell-wise objective at any alpha with
    ``beta = B alpha``.
    """
    if decomp.p is None:
        raise ValueError("decomposition was built without a delta field")
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != decomp.n_shapelets:
        raise DimensionMismatchError("beta length must equal the number of shapelets")
    val = float(np.sum(decomp.p * np.maximum(beta, 0.0) - decomp.q * np.minimum(beta, 1.0)))
    if include_uncovered:
        val += decomp.uncovered_constant
    return val


def format_report(decomp: ShapeletDecomposition) -> str:
    """Plain-text dump: shapelet sizes, bearing rows and the p/q table."""
    lines = [f"shapes: {decomp.n_shapes}", f"shapelets: {decomp.n_shapelets}",
             f"uncovered_constant: {float(decomp.uncovered_constant)!r}", ""]
    head = "shapelet\tsize\tbearing"
    if decomp.p is not None:
        head += "\tp\tq"
    lines.append(head)
    for i, cells in enumerate(decomp.shapelets):
        row = "".join(str(int(v)) for v in decomp.bearing[i])
        line = f"{i}\t{len(cells)}\t{row}"
        if decomp.p is not None:
            line += f"\t{float(decomp.p[i])!r}\t{float(decomp.q[i])!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"
