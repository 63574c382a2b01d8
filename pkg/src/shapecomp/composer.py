"""The discretized composition problem and exact evaluation of compositions.

For cells ``x_i`` with field value ``delta_i`` and cell volume ``v`` the
convex objective is

    G(alpha) = sum_i max(a_i^T alpha, b_i),
    a_ij = v * delta_i * [x_i in S_j],   b_i = v * min(delta_i, 0),

minimized either under ``||alpha||_1 <= tau`` or with ``lam * ||alpha||_1``
added. Shape indices are 0-based throughout the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .dictionary import Dictionary
from .errors import DimensionMismatchError, SearchSpaceTooLargeError
from .grid import ShapeMask, check_same_grid
from .imaging import DeltaField

SEARCH_LIMIT = 10 ** 7


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Sparse data ``(A, b)`` plus exactly one of a budget `tau` or a weight `lam`."""

    A: sparse.csr_matrix = field(repr=False)
    b: np.ndarray = field(repr=False)
    tau: float | None = None
    lam: float | None = None

    def __post_init__(self):
        A = sparse.csr_matrix(self.A, dtype=float)
        A.sort_indices()
        b = np.asarray(self.b, dtype=float).ravel()
        if b.size != A.shape[0]:
            raise DimensionMismatchError("b must have one entry per row of A")
        if (self.tau is None) == (self.lam is None):
            raise ValueError("set exactly one of tau and lam")
        budget = self.tau if self.tau is not None else self.lam
        if not (np.isfinite(budget) and budget >= 0):
            raise ValueError("tau / lam must be finite and nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_rows(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_shapes(self) -> int:
        return int(self.A.shape[1])

    @property
    def form(self) -> str:
        return "constrained" if self.tau is not None else "regularized"

    def with_budget(self, tau=None, lam=None) -> "ProblemData":
        return ProblemData(self.A, self.b, tau=tau, lam=lam)


def support_tol(alpha) -> float:
    alpha = np.asarray(alpha, dtype=float)
    return 1e-6 * max(1.0, float(np.max(np.abs(alpha), initial=0.0)))


@dataclass(frozen=True, eq=False)
class AlphaVector:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).ravel().copy()
        if not np.all(np.isfinite(a)):
            raise ValueError("alpha must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    def support(self, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``(I_plus, I_minus)``: indices with alpha above `tol` / below ``-tol``."""
        tol = support_tol(self.alpha) if tol is None else tol
        return np.flatnonzero(self.alpha > tol), np.flatnonzero(self.alpha < -tol)

    def composition(self, tol: float | None = None) -> "Composition":
        plus, minus = self.support(tol)
        return Composition(plus, minus)


@dataclass(frozen=True)
class Composition:
    """Signed index sets; the realized region is ``union(I_plus) minus union(I_minus)``."""

    i_plus: tuple[int, ...] = ()
    i_minus: tuple[int, ...] = ()

    def __post_init__(self):
        plus = tuple(sorted(int(j) for j in self.i_plus))
        minus = tuple(sorted(int(j) for j in self.i_minus))
        if len(set(plus)) != len(plus) or len(set(minus)) != len(minus):
            raise ValueError("index sets contain duplicates")
        if set(plus) & set(minus):
            raise ValueError("I_plus and I_minus must be disjoint")
        if any(j < 0 for j in plus + minus):
            raise ValueError("indices must be nonnegative")
        object.__setattr__(self, "i_plus", plus)
        object.__setattr__(self, "i_minus", minus)

    @property
    def size(self) -> int:
        return len(self.i_plus) + len(self.i_minus)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.i_plus + self.i_minus))

    def check(self, n_shapes: int) -> None:
        if any(j >= n_shapes for j in self.i_plus + self.i_minus):
            raise IndexError("composition index out of range for dictionary")


def assemble(delta: DeltaField, dictionary: Dictionary, tau: float | None = None,
             lam: float | None = None) -> ProblemData:
    """Build ``(A, b)``; rows of cells with zero field are kept as zero rows."""
    grid = check_same_grid(delta, dictionary)
    w = delta.delta * grid.cell_volume
    M = dictionary.membership().tocsr()
    A = sparse.diags(w) @ M
    A = sparse.csr_matrix(A)
    A.eliminate_zeros()
    b = np.minimum(w, 0.0)
    return ProblemData(A, b, tau=tau, lam=lam)


def objective(pd: ProblemData, alpha, with_active: bool = False):
    """``sum_i max(a_i^T alpha, b_i)``.

    With ``with_active=True`` also return a boolean per row that is True where
    the affine piece attains the max (``a_i^T alpha >= b_i``).
    """
    alpha = np.asarray(getattr(alpha, "alpha", alpha), dtype=float).ravel()
    if alpha.size != pd.n_shapes:
        raise DimensionMismatchError(f"alpha has {alpha.size} entries, problem has {pd.n_shapes} shapes")
    lin = pd.A @ alpha
    val = float(np.sum(np.maximum(lin, pd.b)))
    if with_active:
        return val, lin >= pd.b
    return val


def l1_penalized_objective(pd: ProblemData, alpha) -> float:
    """Objective of the form the problem is posed in (adds ``lam*||alpha||_1`` when regularized)."""
    val = objective(pd, alpha)
    if pd.lam is not None:
        val += pd.lam * float(np.sum(np.abs(np.asarray(getattr(alpha, "alpha", alpha)))))
    return val


def realize(comp: Composition, dictionary: Dictionary) -> ShapeMask:
    comp.check(dictionary.n_shapes)
    grid = dictionary.grid
    plus = np.zeros(grid.size, dtype=bool)
    for j in comp.i_plus:
        plus[dictionary.shapes[j].cells] = True
    for j in comp.i_minus:
        plus[dictionary.shapes[j].cells] = False
    return ShapeMask.from_bool(grid, plus, allow_empty=True)


def energy(comp: Composition, dictionary: Dictionary, delta: DeltaField) -> float:
    """``E(R) = sum over realized cells of delta * cell volume``."""
    check_same_grid(delta, dictionary)
    mask = realize(comp, dictionary)
    return float(np.sum(delta.delta[mask.cells]) * dictionary.grid.cell_volume)


def search_space_size(n_shapes: int, s: int) -> int:
    return sum(math.comb(n_shapes, k) * 2 ** k for k in range(0, min(s, n_shapes) + 1))


def _subset_energies(sig_sums: np.ndarray, k: int) -> np.ndarray:
    # zeta transform: out[P] = sum over nonzero signatures contained in P
    out = sig_sums.copy()
    out[0] = 0.0
    for bit in range(k):
        step = 1 << bit
        idx = np.arange(1 << k)
        has = (idx & step) != 0
        out[has] += out[idx[has] ^ step]
    return out


def brute_force_min(dictionary: Dictionary, delta: DeltaField, s: int,
                    limit: int = SEARCH_LIMIT) -> tuple[Composition, float]:
    """Exhaustive minimizer of ``E`` over signed index sets of size <= `s`.

    Ties are broken by the smallest ``(size, sorted indices, sorted I_minus)``.
    Returns the composition and its energy as computed by :func:`energy`.
    """
    check_same_grid(delta, dictionary)
    n = dictionary.n_shapes
    if s < 0:
        raise ValueError("s must be nonnegative")
    total = search_space_size(n, s)
    if total > limit:
        raise SearchSpaceTooLargeError(f"{total} signed subsets exceed the limit {limit}")
    d = delta.delta
    vol = dictionary.grid.cell_volume
    cells = [sh.cells for sh in dictionary.shapes]

    # candidates are scored with a fast subset-sum; near-ties are re-scored exactly
    scale = 1e-9 * max(1.0, float(np.sum(np.abs(d))) * vol)
    best = 0.0
    cands = [(0.0, (0, (), ()), Composition())]
    for k in range(1, min(s, n) + 1):
        full = (1 << k) - 1
        for subset in itertools.combinations(range(n), k):
            cat = np.concatenate([cells[j] for j in subset])
            bits = np.concatenate([np.full(len(cells[j]), 1 << t, dtype=np.int64) for t, j in enumerate(subset)])
            uniq, inv = np.unique(cat, return_inverse=True)
            sig = np.bincount(inv, weights=bits).astype(np.int64)
            sums = np.bincount(sig, weights=d[uniq], minlength=1 << k)
            energies = _subset_energies(sums, k) * vol
            lo = float(energies.min())
            if lo > best + scale:
                continue
            for P in np.flatnonzero(energies <= min(best, lo) + scale):
                plus = tuple(subset[t] for t in range(k) if P >> t & 1)
                minus = tuple(subset[t] for t in range(k) if (full ^ P) >> t & 1)
                cands.append((float(energies[P]), (k, subset, minus), Composition(plus, minus)))
            if lo < best:
                best = lo
                cands = [c for c in cands if c[0] <= best + scale]
    finalists = sorted(((energy(c, dictionary, delta), key, c) for e, key, c in cands if e <= best + scale),
                       key=lambda t: (t[0], t[1]))
    return finalists[0][2], finalists[0][0]
