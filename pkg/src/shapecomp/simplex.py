"""Bounded-variable revised simplex.

Solves ``min c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lo <= x <= hi``
with sparse data. Rows get slack columns so the working system is
``M [x; s; art] = rhs``; every nonbasic variable sits at a finite bound (or
at 0 when free). The basis inverse is an LU factorization with
product-form eta updates, refactorized every `refactor` pivots.

Pricing is Devex. The ratio test is Harris's two-pass test with the
EXPAND tolerance schedule, so every pivot moves by a small positive step;
after a run of such forced steps the bounds of the basic variables are
widened by small random amounts (seeded, so runs are reproducible). At
the optimum the bounds are restored and a short bounded dual simplex
removes the remaining infeasibility. If stalling persists the solver
switches to Bland's rule until a pivot makes real progress.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"

AT_LOWER, AT_UPPER, AT_ZERO, BASIC = 0, 1, 2, 3


@dataclass
class SimplexOptions:
    pivot_tol: float = 1e-9
    rel_pivot_tol: float = 1e-7  # pivots must also exceed this times the largest column entry
    feas_tol: float = 1e-8
    opt_tol: float = 1e-9
    max_iters: int = 200000
    refactor: int = 64
    bland_after: int = 1000
    perturb_after: int = 50  # forced steps in a row before bounds are perturbed
    perturb: float = 1e-7
    perturb_seed: int = 0
    expand_reset: int = 10000  # pivots between resets of the growing feasibility tolerance


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray
    objective: float
    row_duals: np.ndarray  # pi = B^-T c_B for each working row
    reduced: np.ndarray  # reduced costs of structural columns
    iterations: int
    message: str = ""


class _Basis:
    """LU of the basis matrix plus a list of eta columns."""

    def __init__(self, M: sparse.csc_matrix, cols: np.ndarray):
        self.m = M.shape[0]
        B = M[:, cols].tocsc()
        self.lu = splu(B, permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray, np.ndarray, float]] = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(v)
        for r, idx, val, piv in self.etas:
            xr = x[r] / piv
            if xr != 0.0:
                x[idx] -= val * xr
            x[r] = xr
        return x

    def btran(self, v: np.ndarray) -> np.ndarray:
        z = np.array(v, dtype=float)
        for r, idx, val, piv in reversed(self.etas):
            z[r] = (z[r] - val @ z[idx]) / piv
        return self.lu.solve(z, trans="T")

    def update(self, r: int, w: np.ndarray) -> None:
        idx = np.flatnonzero(w)
        idx = idx[idx != r]
        self.etas.append((r, idx, w[idx].copy(), float(w[r])))


def _column(M: sparse.csc_matrix, j: int, m: int) -> np.ndarray:
    v = np.zeros(m)
    s, e = M.indptr[j], M.indptr[j + 1]
    v[M.indices[s:e]] = M.data[s:e]
    return v


def solve_bounded(c, A_ub, b_ub, A_eq, b_eq, lo, hi, opts: SimplexOptions | None = None) -> SimplexResult:
    """Run two-phase bounded simplex on already presolved data.

    All arguments must be dense vectors / sparse matrices with consistent
    shapes (empty matrices allowed). Returned ``row_duals`` follow the
    ``pi`` convention: ``reduced = c - M^T pi``.
    """
    opts = opts or SimplexOptions()
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = sparse.csc_matrix(A_ub, shape=(A_ub.shape[0], n))
    A_eq = sparse.csc_matrix(A_eq, shape=(A_eq.shape[0], n))
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    rhs = np.concatenate([np.asarray(b_ub, float), np.asarray(b_eq, float)])
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()

    if m == 0:
        x = np.where(c > 0, lo, np.where(c < 0, hi, np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))))
        if not np.all(np.isfinite(x)):
            return SimplexResult(UNBOUNDED, np.nan_to_num(x), -np.inf, np.zeros(0), c.copy(), 0, "unbounded column")
        return SimplexResult(OPTIMAL, x, float(c @ x), np.zeros(0), c.copy(), 0)

    # structural block, then one slack per row (fixed at 0 for equality rows)
    A = sparse.vstack([A_ub, A_eq], format="csc")
    slack = sparse.identity(m, format="csc")
    s_lo = np.zeros(m)
    s_hi = np.concatenate([np.full(m_ub, np.inf), np.zeros(m_eq)])

    # initial nonbasic values for structurals
    x0 = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    resid = rhs - A @ x0

    # crash: singleton structural columns with a feasible value, else slack, else artificial
    counts = np.diff(A.indptr)
    basis = np.full(m, -1, dtype=np.int64)
    for j in np.flatnonzero(counts == 1):
        r = A.indices[A.indptr[j]]
        if basis[r] >= 0:
            continue
        a = A.data[A.indptr[j]]
        if a == 0.0:
            continue
        val = x0[j] + resid[r] / a
        if lo[j] - opts.feas_tol <= val <= hi[j] + opts.feas_tol and (r >= m_ub or resid[r] <= 0):
            basis[r] = j
    art_rows = []
    for r in range(m):
        if basis[r] >= 0:
            continue
        if (r < m_ub and resid[r] >= -opts.feas_tol) or (r >= m_ub and abs(resid[r]) <= opts.feas_tol):
            basis[r] = n + r
        else:
            art_rows.append(r)
    n_art = len(art_rows)
    if n_art:
        art = sparse.csc_matrix(
            (np.sign(resid[art_rows]), (np.asarray(art_rows), np.arange(n_art))), shape=(m, n_art))
        for k, r in enumerate(art_rows):
            basis[r] = n + m + k
    else:
        art = sparse.csc_matrix((m, 0))
    M = sparse.hstack([A, slack, art], format="csc")
    M.sort_indices()
    ntot = n + m + n_art
    LO = np.concatenate([lo, s_lo, np.zeros(n_art)])
    HI = np.concatenate([hi, s_hi, np.full(n_art, np.inf)])
    cost2 = np.concatenate([c, np.zeros(m + n_art)])
    cost1 = np.concatenate([np.zeros(n + m), np.ones(n_art)])

    state = np.empty(ntot, dtype=np.int8)
    xval = np.zeros(ntot)
    xval[:n] = x0
    state[:n] = np.where(np.isfinite(lo), AT_LOWER, np.where(np.isfinite(hi), AT_UPPER, AT_ZERO))
    state[n:] = AT_LOWER
    state[basis] = BASIC

    solver = _Simplex(M, rhs, LO, HI, basis, state, xval, opts)
    total_iters = 0
    if n_art:
        status = solver.run(cost1)
        total_iters += solver.iters
        infeas = float(np.sum(solver.x[n + m:]))
        if status == ITERATION_LIMIT:
            return solver.result(status, cost2, n, total_iters, "iteration limit in phase 1")
        if infeas > opts.feas_tol * max(1.0, np.abs(rhs).max()):
            return solver.result(INFEASIBLE, cost2, n, total_iters, f"phase 1 infeasibility {infeas:.3g}")
        # artificials are pinned at zero from here on
        solver.hi[n + m:] = 0.0
        solver.x[n + m:][solver.state[n + m:] != BASIC] = 0.0
    status = solver.run(cost2)
    total_iters += solver.iters
    return solver.result(status, cost2, n, total_iters)


class _Simplex:
    def __init__(self, M, rhs, lo, hi, basis, state, x, opts: SimplexOptions):
        self.M = M
        self.MT = M.T.tocsr()
        self.rhs = rhs
        self.lo, self.hi = lo, hi
        self.basis = basis
        self.state = state
        self.x = x
        self.opts = opts
        self.m = M.shape[0]
        self.iters = 0
        self.rel_pivot = opts.rel_pivot_tol
        self._bounds0 = None
        self.delta0 = 0.5 * opts.feas_tol
        self.tau_inc = (opts.feas_tol - self.delta0) / opts.expand_reset
        self.delta = self.delta0
        self.forced = False
        self._factor()

    def _factor(self):
        try:
            self.B = _Basis(self.M, self.basis)
        except RuntimeError:
            # accumulated eta error let a dependent column in; go back to the last good basis
            if getattr(self, "_saved", None) is None:
                raise
            self.basis[:], self.state[:], self.x[:] = self._saved
            self.rel_pivot = min(1e-3, self.rel_pivot * 100.0)
            self.B = _Basis(self.M, self.basis)
        self._saved = (self.basis.copy(), self.state.copy(), self.x.copy())
        nonbasic = self.state != BASIC
        xn = np.where(nonbasic, self.x, 0.0)
        self.x[self.basis] = self.B.ftran(self.rhs - self.M @ xn)

    def _reduced(self, cost):
        d = cost - self.MT @ self.B.btran(cost[self.basis])
        d[self.basis] = 0.0
        return d

    def run(self, cost: np.ndarray) -> str:
        self.iters = 0
        self._bounds0 = None
        status = self._primal(cost)
        if self._bounds0 is not None:
            self._restore_bounds()
            if status == OPTIMAL:
                status = self._dual_cleanup(cost)
        return status

    def _perturb(self, idx=None):
        """Widen finite bounds of `idx` (default: the basic variables) by small random amounts.

        Bounds only move away from the current values, so feasibility is kept.
        """
        if self._bounds0 is None:
            self._bounds0 = (self.lo.copy(), self.hi.copy())
            self._pert_rng = np.random.default_rng(self.opts.perturb_seed)
            self._pert_done = np.zeros(self.lo.size, dtype=bool)
        idx = self.basis.copy() if idx is None else np.atleast_1d(idx)
        idx = idx[~self._pert_done[idx] & (self.lo[idx] < self.hi[idx])]
        self._pert_done[idx] = True
        mag = self.opts.perturb * (1.0 + self._pert_rng.random(idx.size))
        lo, hi = self.lo[idx], self.hi[idx]
        self.lo[idx] = np.where(np.isfinite(lo), lo - mag * (1.0 + np.abs(lo)), lo)
        self.hi[idx] = np.where(np.isfinite(hi), hi + mag * (1.0 + np.abs(hi)), hi)

    def _restore_bounds(self):
        self.lo[:], self.hi[:] = self._bounds0
        self._bounds0 = None
        st = self.state
        self.x[st == AT_LOWER] = self.lo[st == AT_LOWER]
        self.x[st == AT_UPPER] = self.hi[st == AT_UPPER]
        self._factor()

    def _dual_cleanup(self, cost: np.ndarray) -> str:
        """Bounded dual simplex from a dual feasible basis until the basics are within bounds."""
        o = self.opts
        fixed = self.lo == self.hi
        d = self._reduced(cost)
        unit = np.zeros(self.m)
        since_factor = 0
        for _ in range(10 * self.m + 100):
            if since_factor >= o.refactor:
                self._factor()
                since_factor = 0
                d = self._reduced(cost)
            xb = self.x[self.basis]
            below = self.lo[self.basis] - xb
            above = xb - self.hi[self.basis]
            viol = np.maximum(below, above)
            r = int(np.argmax(viol))
            if viol[r] <= o.feas_tol:
                return OPTIMAL
            s = 1.0 if below[r] > above[r] else -1.0  # +1: the leaving basic must increase
            unit[r] = 1.0
            row = self.MT @ self.B.btran(unit)
            unit[r] = 0.0
            st = self.state
            sr = s * row
            elig = ((st == AT_LOWER) & (sr < -o.pivot_tol)) | ((st == AT_UPPER) & (sr > o.pivot_tol))
            elig |= (st == AT_ZERO) & (np.abs(row) > o.pivot_tol)
            elig &= ~fixed
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                return INFEASIBLE
            ratio = np.abs(d[cand]) / np.abs(row[cand])
            near = cand[ratio <= ratio.min() + o.opt_tol]
            q = int(near[np.argmax(np.abs(row[near]))])
            w = self.B.ftran(_column(self.M, q, self.m))
            piv = w[r]
            target = self.lo[self.basis[r]] if s > 0 else self.hi[self.basis[r]]
            step = (xb[r] - target) / piv
            leaving = self.basis[r]
            self.x[self.basis] -= step * w
            self.x[q] += step
            self.x[leaving] = target
            self.state[leaving] = AT_LOWER if s > 0 else AT_UPPER
            d -= (d[q] / row[q]) * row
            d[q] = 0.0
            self.basis[r] = q
            self.state[q] = BASIC
            self.B.update(r, w)
            since_factor += 1
            self.iters += 1
        return ITERATION_LIMIT

    def _primal(self, cost: np.ndarray) -> str:
        """Primal simplex with Devex pricing; reduced costs are updated from the pivot row."""
        o = self.opts
        degenerate = 0
        bland = False
        since_factor = len(self.B.etas)
        fixed = self.lo == self.hi
        weights = np.ones(cost.size)
        d = self._reduced(cost)
        unit = np.zeros(self.m)
        while True:
            if self.iters >= o.max_iters:
                return ITERATION_LIMIT
            if since_factor >= o.refactor:
                self._factor()
                since_factor = 0
                d = self._reduced(cost)
            self.delta += self.tau_inc
            if self.delta >= o.feas_tol:
                # put nonbasics back on their bounds and restart the tolerance schedule
                self.delta = self.delta0
                self._factor()
                since_factor = 0
                d = self._reduced(cost)
            st = self.state
            elig = ((st == AT_LOWER) & (d < -o.opt_tol)) | ((st == AT_UPPER) & (d > o.opt_tol))
            elig |= (st == AT_ZERO) & (np.abs(d) > o.opt_tol)
            elig &= ~fixed
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                if since_factor:
                    # confirm optimality with fresh factors and reduced costs
                    self._factor()
                    since_factor = 0
                    d = self._reduced(cost)
                    continue
                return OPTIMAL
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(d[cand] ** 2 / weights[cand])])
            direction = 1.0 if d[q] < 0 else -1.0
            w = self.B.ftran(_column(self.M, q, self.m))

            r, theta = self._ratio(w, direction, bland)
            span = self.hi[q] - self.lo[q]
            if r < 0 and not np.isfinite(span):
                if since_factor:
                    self._factor()
                    since_factor = 0
                    d = self._reduced(cost)
                    continue
                return UNBOUNDED
            self.iters += 1
            if r < 0 or span <= theta:
                # bound flip of the entering variable
                step = span * direction
                self.x[self.basis] -= step * w
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                self.state[q] = AT_UPPER if direction > 0 else AT_LOWER
                degenerate = 0
                bland = False
                continue
            unit[r] = 1.0
            row = self.MT @ self.B.btran(unit)
            unit[r] = 0.0
            piv = w[r]
            if abs(row[q] - piv) > 1e-7 * (1.0 + abs(piv)) and since_factor:
                self._factor()
                since_factor = 0
                d = self._reduced(cost)
                continue
            leaving = self.basis[r]
            self.x[self.basis] -= theta * direction * w
            self.x[q] += theta * direction
            # leaving variable goes to the bound it hit
            moving_down = direction * w[r] > 0
            self.state[leaving] = AT_LOWER if moving_down else AT_UPPER
            self.x[leaving] = self.lo[leaving] if moving_down else self.hi[leaving]
            # reduced costs and Devex reference weights
            d -= (d[q] / piv) * row
            d[q] = 0.0
            wq = weights[q]
            np.maximum(weights, (row / piv) ** 2 * wq, out=weights)
            weights[leaving] = max(wq / piv ** 2, 1.0)
            if weights.max() > 1e8:
                weights[:] = 1.0
            self.basis[r] = q
            self.state[q] = BASIC
            self.B.update(r, w)
            since_factor += 1
            if self._bounds0 is not None:
                self._perturb(q)
            if self.forced:
                degenerate += 1
                if degenerate > o.perturb_after and self._bounds0 is None:
                    self._perturb()
                    degenerate = 0
                elif degenerate > o.bland_after:
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _ratio(self, w: np.ndarray, direction: float, bland: bool):
        o = self.opts
        xb = self.x[self.basis]
        lb = self.lo[self.basis]
        ub = self.hi[self.basis]
        g = direction * w  # basic values move by -theta * g
        tol = max(o.pivot_tol, self.rel_pivot * float(np.abs(g).max(initial=0.0)))
        dec = (g > tol) & np.isfinite(lb)
        inc = (g < -tol) & np.isfinite(ub)
        rows = np.flatnonzero(dec | inc)
        if rows.size == 0:
            return -1, np.inf
        gr = g[rows]
        room = np.where(gr > 0, xb[rows] - lb[rows], ub[rows] - xb[rows])
        room = np.maximum(room, 0.0)
        ratio = room / np.abs(gr)
        if bland:
            tmin = ratio.min()
            ties = rows[ratio <= tmin + 1e-12]
            r = int(ties[np.argmin(self.basis[ties])])
            self.forced = tmin <= 0.0
            return r, float(max(tmin, 0.0))
        if self._bounds0 is not None:
            # perturbed bounds break ties, so an exact ratio test is enough
            tmin = float(ratio.min())
            k = np.flatnonzero(ratio <= tmin + 1e-12 * max(1.0, tmin))
            best = k[np.argmax(np.abs(gr[k]))]
            self.forced = tmin <= 0.0
            return int(rows[best]), tmin
        # EXPAND: relaxed pass with a slowly growing tolerance, largest pivot among
        # admissible rows, and a small minimum step so that no pivot is degenerate
        raw = np.where(gr > 0, xb[rows] - lb[rows], ub[rows] - xb[rows])
        relaxed = (raw + self.delta) / np.abs(gr)
        tmax = max(float(relaxed.min()), 0.0)
        k = np.flatnonzero(ratio <= tmax)
        best = k[np.argmax(np.abs(gr[k]))]
        # a step that only uses the tolerance band counts as degenerate
        self.forced = raw[best] <= self.delta
        return int(rows[best]), float(max(ratio[best], self.tau_inc / abs(gr[best])))

    def result(self, status, cost, n, iters, message="") -> SimplexResult:
        self._factor()
        pi = self.B.btran(cost[self.basis])
        reduced = cost - self.MT @ pi
        x = self.x[:n].copy()
        x = np.clip(x, self.lo[:n], self.hi[:n])
        return SimplexResult(status, x, float(cost[:n] @ x), pi, reduced[:n], iters, message)
