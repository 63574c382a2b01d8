"""Linear programs for the composition problem.

The max-affine objective is linearized with one epigraph variable per cell
and a split ``alpha = z1 - z2`` of the coefficients:

    min 1^T z
    s.t. -z + A z1 - A z2 <= b
         1^T z1 + 1^T z2   <= tau
         z, z1, z2 >= 0

so that ``G(alpha) = optimum + sum(b)``. The dual of this program has
``N + 1`` variables ``y = (y_cells, y_tau)``:

    min b^T y_cells + tau * y_tau
    s.t. y_cells <= 1,  |A^T y_cells| <= y_tau,  y >= 0

and ``primal optimum = -(dual optimum)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import numpy as np
from scipy import sparse

from . import simplex
from .composer import ProblemData, objective
from .errors import FormatError

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = (
    simplex.OPTIMAL, simplex.INFEASIBLE, simplex.UNBOUNDED, simplex.ITERATION_LIMIT)


@dataclass(eq=False)
class StandardLP:
    """``min c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq`` with simple bounds.

    `nonneg[j]` selects ``x_j >= 0`` (True) or a free variable (False);
    `upper` optionally caps variables from above.
    """

    c: np.ndarray
    A_ub: sparse.csr_matrix
    b_ub: np.ndarray
    nonneg: np.ndarray = None  # type: ignore[assignment]
    var_names: list[str] = None  # type: ignore[assignment]
    A_eq: sparse.csr_matrix | None = None
    b_eq: np.ndarray | None = None
    upper: np.ndarray | None = None
    row_names: list[str] = None  # type: ignore[assignment]
    name: str = "LP"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub = sparse.csr_matrix((0, n)) if self.A_ub is None else sparse.csr_matrix(self.A_ub, dtype=float)
        if self.A_ub.shape[1] != n:
            raise ValueError("A_ub column count differs from len(c)")
        self.A_ub.eliminate_zeros()
        self.A_ub.sort_indices()
        self.b_ub = np.asarray(self.b_ub if self.b_ub is not None else [], dtype=float).ravel()
        if self.b_ub.size != self.A_ub.shape[0]:
            raise ValueError("b_ub length differs from A_ub rows")
        if self.A_eq is None:
            self.A_eq = sparse.csr_matrix((0, n))
            self.b_eq = np.zeros(0)
        self.A_eq = sparse.csr_matrix(self.A_eq, dtype=float)
        self.A_eq.eliminate_zeros()
        self.A_eq.sort_indices()
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        if self.A_eq.shape[1] != n or self.b_eq.size != self.A_eq.shape[0]:
            raise ValueError("equality block has inconsistent shape")
        self.nonneg = np.ones(n, dtype=bool) if self.nonneg is None else np.asarray(self.nonneg, dtype=bool).ravel()
        if self.nonneg.size != n:
            raise ValueError("nonneg length differs from len(c)")
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.var_names is None:
            self.var_names = [f"X{j}" for j in range(n)]
        m = self.A_ub.shape[0] + self.A_eq.shape[0]
        if self.row_names is None:
            self.row_names = [f"R{i}" for i in range(m)]
        if len(self.var_names) != n or len(self.row_names) != m:
            raise ValueError("name lists have the wrong length")
        for arr in (self.c, self.b_ub, self.b_eq, self.A_ub.data, self.A_eq.data):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")

    @property
    def n_vars(self) -> int:
        return int(self.c.size)

    @property
    def n_rows(self) -> int:
        return int(self.A_ub.shape[0] + self.A_eq.shape[0])

    @property
    def lower(self) -> np.ndarray:
        return np.where(self.nonneg, 0.0, -np.inf)


@dataclass(eq=False)
class LpSolution:
    x: np.ndarray
    objective: float
    status: str
    duals: np.ndarray = field(repr=False)  # >= 0 on A_ub rows, then free on A_eq rows
    iterations: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


# --- presolve + solve --------------------------------------------------------


def _row_counts(A: sparse.csr_matrix) -> np.ndarray:
    return np.diff(A.indptr)


def solve(lp: StandardLP, opts: simplex.SimplexOptions | None = None, backend: str = "simplex") -> LpSolution:
    """Solve with the built-in simplex (default) or scipy's HiGHS (``backend="highs"``).

    Presolve removes empty rows, turns singleton inequality/equality rows into
    variable bounds and fixes columns that no longer appear in any row.
    Row duals are reported as nonnegative multipliers of ``A_ub`` rows and
    free multipliers of ``A_eq`` rows, so that ``c + A_ub^T y + A_eq^T mu``
    is the vector of reduced costs.
    """
    if backend == "highs":
        return _solve_highs(lp)
    if backend != "simplex":
        raise ValueError(f"unknown LP backend {backend!r}")
    opts = opts or simplex.SimplexOptions()
    tol = opts.feas_tol
    n = lp.n_vars
    lo = lp.lower.copy()
    hi = lp.upper.copy()
    m_ub, m_eq = lp.A_ub.shape[0], lp.A_eq.shape[0]

    def fail(status, msg):
        return LpSolution(np.zeros(n), np.nan, status, np.zeros(m_ub + m_eq), 0, msg)

    keep_ub = np.ones(m_ub, dtype=bool)
    keep_eq = np.ones(m_eq, dtype=bool)
    # (row position in the dual vector, variable, coefficient, implied bound side)
    singletons: list[tuple[int, int, float, str]] = []
    for A, b, keep, off, eq in ((lp.A_ub, lp.b_ub, keep_ub, 0, False), (lp.A_eq, lp.b_eq, keep_eq, m_ub, True)):
        cnt = _row_counts(A)
        for i in np.flatnonzero(cnt == 0):
            bad = abs(b[i]) > tol * (1 + abs(b[i])) if eq else b[i] < -tol * (1 + abs(b[i]))
            if bad:
                return fail(INFEASIBLE, f"empty row {off + i} has infeasible right-hand side")
            keep[i] = False
        for i in np.flatnonzero(cnt == 1):
            j = int(A.indices[A.indptr[i]])
            a = float(A.data[A.indptr[i]])
            if a == 0.0:
                continue
            v = b[i] / a
            keep[i] = False
            if eq:
                lo[j] = max(lo[j], v)
                hi[j] = min(hi[j], v)
                singletons.append((off + i, j, a, "eq"))
            elif a > 0:
                hi[j] = min(hi[j], v)
                singletons.append((off + i, j, a, "hi"))
            else:
                lo[j] = max(lo[j], v)
                singletons.append((off + i, j, a, "lo"))
    if np.any(lo > hi + tol * (1 + np.abs(lo))):
        return fail(INFEASIBLE, "conflicting variable bounds")
    hi = np.maximum(hi, lo)

    A_ub = lp.A_ub[keep_ub]
    A_eq = lp.A_eq[keep_eq]
    used = (np.diff(A_ub.tocsc().indptr) + np.diff(A_eq.tocsc().indptr)) > 0
    cols = np.flatnonzero(used)
    x = np.zeros(n)
    ray = None
    for j in np.flatnonzero(~used):
        cj = lp.c[j]
        if cj > 0:
            x[j] = lo[j]
        elif cj < 0:
            x[j] = hi[j]
        else:
            x[j] = lo[j] if np.isfinite(lo[j]) else (hi[j] if np.isfinite(hi[j]) else 0.0)
        if not np.isfinite(x[j]):
            ray = ray or f"column {lp.var_names[j]} is unbounded"
            x[j] = 0.0

    res = simplex.solve_bounded(lp.c[cols], A_ub[:, cols], lp.b_ub[keep_ub], A_eq[:, cols], lp.b_eq[keep_eq],
                                lo[cols], hi[cols], opts)
    x[cols] = res.x
    if ray is not None and res.status in (OPTIMAL, UNBOUNDED):
        return fail(UNBOUNDED, ray)
    duals = np.zeros(m_ub + m_eq)
    pos = np.concatenate([np.flatnonzero(keep_ub), m_ub + np.flatnonzero(keep_eq)])
    duals[pos] = -res.row_duals
    if res.status != OPTIMAL:
        return LpSolution(x, float(lp.c @ x) if res.status != UNBOUNDED else -np.inf, res.status, duals,
                          res.iterations, res.message)

    # reduced costs with the surviving rows; singleton rows absorb what is left
    red = lp.c + lp.A_ub.T @ duals[:m_ub] + lp.A_eq.T @ duals[m_ub:]
    claimed = set()
    for pos_i, j, a, side in singletons:
        if j in claimed:
            continue
        d = red[j]
        at_hi = abs(x[j] - hi[j]) <= tol * (1 + abs(hi[j]))
        at_lo = abs(x[j] - lo[j]) <= tol * (1 + abs(lo[j]))
        bound = lp.b_ub[pos_i] / a if side != "eq" else lp.b_eq[pos_i - m_ub] / a
        if side == "hi" and at_hi and d < 0 and abs(bound - hi[j]) <= tol * (1 + abs(hi[j])):
            duals[pos_i] = -d / a
        elif side == "lo" and at_lo and d > 0 and abs(bound - lo[j]) <= tol * (1 + abs(lo[j])):
            duals[pos_i] = -d / a
        elif side == "eq":
            duals[pos_i] = -d / a
        else:
            continue
        claimed.add(j)
        red[j] = 0.0
    return LpSolution(x, float(lp.c @ x), OPTIMAL, duals, res.iterations, res.message)


def _solve_highs(lp: StandardLP) -> LpSolution:
    from scipy.optimize import linprog

    bounds = np.column_stack([lp.lower, lp.upper])
    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi) for lo, hi in bounds]
    kw = {}
    if lp.A_ub.shape[0]:
        kw.update(A_ub=lp.A_ub, b_ub=lp.b_ub)
    if lp.A_eq.shape[0]:
        kw.update(A_eq=lp.A_eq, b_eq=lp.b_eq)
    r = linprog(lp.c, bounds=bounds, method="highs", **kw)
    status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}.get(r.status, ITERATION_LIMIT)
    x = r.x if r.x is not None else np.zeros(lp.n_vars)
    duals = np.zeros(lp.n_rows)
    if status == OPTIMAL:
        if lp.A_ub.shape[0]:
            duals[:lp.A_ub.shape[0]] = -r.ineqlin.marginals
        if lp.A_eq.shape[0]:
            duals[lp.A_ub.shape[0]:] = -r.eqlin.marginals
    obj = float(r.fun) if r.fun is not None else np.nan
    return LpSolution(np.asarray(x, float), obj, status, duals, int(getattr(r, "nit", 0)), r.message)


# --- builders for the composition problem ------------------------------------


def build_primal(pd: ProblemData) -> StandardLP:
    """Epigraph LP in variables ``(z, z1, z2)``; needs the constrained form."""
    if pd.tau is None:
        raise ValueError("build_primal needs a budget tau; use build_primal_regularized")
    N, ns = pd.A.shape
    top = sparse.hstack([-sparse.identity(N), pd.A, -pd.A])
    bottom = sparse.hstack([sparse.csr_matrix((1, N)), np.ones((1, ns)), np.ones((1, ns))])
    A_ub = sparse.vstack([top, bottom], format="csr")
    b_ub = np.concatenate([pd.b, [pd.tau]])
    c = np.concatenate([np.ones(N), np.zeros(2 * ns)])
    names = [f"Z{i}" for i in range(N)] + [f"P{j}" for j in range(ns)] + [f"M{j}" for j in range(ns)]
    rows = [f"C{i}" for i in range(N)] + ["BUDGET"]
    return StandardLP(c, A_ub, b_ub, var_names=names, row_names=rows, name="CSCPRIM")


def build_primal_regularized(pd: ProblemData) -> StandardLP:
    if pd.lam is None:
        raise ValueError("build_primal_regularized needs a weight lam")
    N, ns = pd.A.shape
    A_ub = sparse.hstack([-sparse.identity(N), pd.A, -pd.A], format="csr")
    c = np.concatenate([np.ones(N), np.full(2 * ns, pd.lam)])
    names = [f"Z{i}" for i in range(N)] + [f"P{j}" for j in range(ns)] + [f"M{j}" for j in range(ns)]
    return StandardLP(c, A_ub, pd.b.copy(), var_names=names, row_names=[f"C{i}" for i in range(N)], name="CSCREG")


def build_dual(pd: ProblemData) -> StandardLP:
    """Dual LP in ``y = (y_cells, y_tau)``.

    Rows are ``y_i <= 1``, then ``-A^T y - y_tau <= 0`` (paired with the
    primal ``z1``), then ``A^T y - y_tau <= 0`` (paired with ``z2``).
    """
    if pd.tau is None:
        raise ValueError("build_dual needs a budget tau")
    N, ns = pd.A.shape
    At = pd.A.T.tocsr()
    A_ub = sparse.vstack([
        sparse.hstack([sparse.identity(N), sparse.csr_matrix((N, 1))]),
        sparse.hstack([-At, -np.ones((ns, 1))]),
        sparse.hstack([At, -np.ones((ns, 1))]),
    ], format="csr")
    b_ub = np.concatenate([np.ones(N), np.zeros(2 * ns)])
    c = np.concatenate([pd.b, [pd.tau]])
    names = [f"Y{i}" for i in range(N)] + ["YTAU"]
    rows = [f"U{i}" for i in range(N)] + [f"P{j}" for j in range(ns)] + [f"M{j}" for j in range(ns)]
    return StandardLP(c, A_ub, b_ub, var_names=names, row_names=rows, name="CSCDUAL")


@dataclass(eq=False)
class CscLpResult:
    alpha: np.ndarray
    objective: float  # G(alpha), with sum(b) added back
    lp_objective: float
    status: str
    method: str
    recovery: str = ""
    iterations: int = 0
    solution: LpSolution | None = field(default=None, repr=False)


def recover_primal_from_dual(pd: ProblemData, sol: LpSolution, tol: float = 1e-7) -> tuple[np.ndarray | None, str]:
    """Recover alpha from an optimal dual solution.

    The multipliers of the rows ``+-A^T y <= y_tau`` are the primal ``z1, z2``;
    they are tried first. Otherwise complementary slackness gives the active
    set (cells with ``0 < y_i < 1`` have ``a_i^T alpha = b_i``; shapes with
    ``|A_j^T y| < y_tau`` have ``alpha_j = 0``) and alpha is the least-squares
    solution of those equations. A candidate is accepted only if it is
    feasible and attains the primal optimum.
    """
    N, ns = pd.A.shape
    target = -sol.objective + float(np.sum(pd.b))
    scale = 1.0 + abs(target) + float(np.sum(np.abs(pd.b)))

    def accept(alpha):
        if alpha is None or not np.all(np.isfinite(alpha)):
            return False
        if np.sum(np.abs(alpha)) > pd.tau + 1e-8 * (1 + pd.tau):
            return False
        return objective(pd, alpha) <= target + tol * scale

    duals = sol.duals
    alpha = duals[N:N + ns] - duals[N + ns:N + 2 * ns]
    if accept(alpha):
        return alpha, "multipliers"

    y, yt = sol.x[:N], sol.x[N]
    corr = pd.A.T @ y
    active = np.flatnonzero(np.abs(np.abs(corr) - yt) <= 1e-9 * (1 + yt)) if yt > 0 else np.arange(ns)
    if active.size == 0:
        alpha = np.zeros(ns)
        return (alpha, "complementary-slackness") if accept(alpha) else (None, "ambiguous")
    mid = np.flatnonzero((y > 1e-9) & (y < 1 - 1e-9))
    rows = [pd.A[mid][:, active].toarray()]
    rhs = [pd.b[mid]]
    if yt > 1e-12:
        rows.append(np.sign(corr[active])[None, :] * -1.0)
        rhs.append(np.array([pd.tau]))
    Msys = np.vstack(rows)
    sol_a, *_ = np.linalg.lstsq(Msys, np.concatenate(rhs), rcond=None)
    alpha = np.zeros(ns)
    alpha[active] = sol_a
    if accept(alpha):
        return alpha, "complementary-slackness"
    return None, "ambiguous"


def solve_csc(pd: ProblemData, method: str = "lp-primal", opts: simplex.SimplexOptions | None = None,
              backend: str = "simplex") -> CscLpResult:
    """Solve the composition problem by LP (``lp-primal`` or ``lp-dual``)."""
    N, ns = pd.A.shape
    shift = float(np.sum(pd.b))

    def primal():
        lp = build_primal(pd) if pd.tau is not None else build_primal_regularized(pd)
        sol = solve(lp, opts, backend)
        alpha = sol.x[N:N + ns] - sol.x[N + ns:]
        obj = objective(pd, alpha) if sol.ok else np.nan
        return CscLpResult(alpha, obj, sol.objective, sol.status, "lp-primal", "", sol.iterations, sol)

    if method == "lp-primal":
        return primal()
    if method != "lp-dual":
        raise ValueError(f"unknown LP method {method!r}")
    if pd.tau is None:
        raise ValueError("the dual route is implemented for the constrained form")
    sol = solve(build_dual(pd), opts, backend)
    if not sol.ok:
        return CscLpResult(np.zeros(ns), np.nan, np.nan, sol.status, "lp-dual", "", sol.iterations, sol)
    alpha, how = recover_primal_from_dual(pd, sol)
    if alpha is None:
        res = primal()
        res.method = "lp-dual"
        res.recovery = "primal-fallback"
        return res
    return CscLpResult(alpha, objective(pd, alpha), 0.0 - sol.objective, OPTIMAL, "lp-dual", how, sol.iterations, sol)


# --- MPS ---------------------------------------------------------------------


def _fmt_num(v: float) -> str:
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    if len(s) <= 12:
        return s
    for prec in range(12, 0, -1):
        s = f"{v:.{prec}g}"
        if len(s) <= 12:
            return s
    raise ValueError(f"cannot format {v!r} in 12 characters")


def export_mps(lp: StandardLP, path, free: bool = False) -> None:
    """Write `lp` in MPS format.

    Fixed format (default) uses the classic field columns 2-3, 5-12, 15-22,
    25-36, 40-47, 50-61, so names are limited to 8 characters and numbers to
    12 (values that need more digits are rounded to fit). ``free=True``
    writes whitespace-separated fields with full ``repr`` precision.
    """
    m_ub = lp.A_ub.shape[0]
    rnames = list(lp.row_names)
    names = list(lp.var_names)
    if not free:
        for nm in rnames + names + [lp.name]:
            if len(nm) > 8 or " " in nm:
                raise ValueError(f"name {nm!r} does not fit fixed MPS (8 chars, no spaces)")
    num = _fmt_num if not free else (lambda v: repr(float(v)))

    def line(f1="", f2="", f3="", f4="", f5="", f6=""):
        if free:
            return " " + " ".join(t for t in (f1, f2, f3, f4, f5, f6) if t)
        s = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}"
        if f5:
            s += f"   {f5:<8}  {f6:>12}"
        return s.rstrip()

    out = [f"NAME          {lp.name}", "ROWS", " N  COST"]
    out += [f" L  {nm}" for nm in rnames[:m_ub]]
    out += [f" E  {nm}" for nm in rnames[m_ub:]]
    out.append("COLUMNS")
    A = sparse.vstack([lp.A_ub, lp.A_eq], format="csc")
    A.sort_indices()
    for j in range(lp.n_vars):
        entries = []
        if lp.c[j] != 0:
            entries.append(("COST", lp.c[j]))
        s, e = A.indptr[j], A.indptr[j + 1]
        entries += [(rnames[i], v) for i, v in zip(A.indices[s:e], A.data[s:e]) if v != 0]
        if not entries:
            entries = [("COST", 0.0)]
        for k in range(0, len(entries), 2):
            a = entries[k]
            if k + 1 < len(entries):
                b = entries[k + 1]
                out.append(line("", names[j], a[0], num(a[1]), b[0], num(b[1])))
            else:
                out.append(line("", names[j], a[0], num(a[1])))
    out.append("RHS")
    rhs = np.concatenate([lp.b_ub, lp.b_eq])
    for i in np.flatnonzero(rhs):
        out.append(line("", "RHS", rnames[i], num(rhs[i])))
    out.append("BOUNDS")
    for j in range(lp.n_vars):
        if not lp.nonneg[j]:
            out.append(line("FR", "BND", names[j]))
        if np.isfinite(lp.upper[j]):
            out.append(line("UP", "BND", names[j], num(lp.upper[j])))
    out.append("ENDATA")
    Path(path).write_text("\n".join(out) + "\n")


def read_mps(path) -> StandardLP:
    """Parse the MPS subset written by :func:`export_mps` (N/L/G/E rows; FR/MI/UP/LO bounds).

    Fields are split on whitespace, which reads both fixed and free files
    because names never contain spaces.
    """
    text = Path(path).read_text().splitlines()
    name = "LP"
    section = None
    obj_row = None
    row_type: dict[str, str] = {}
    row_order: list[str] = []
    cols: dict[str, dict[str, float]] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    lower: dict[str, float] = {}
    upper: dict[str, float] = {}

    for ln in text:
        if not ln.strip() or ln.startswith("*"):
            continue
        if not ln[0].isspace():
            head = ln.split()
            section = head[0]
            if section == "NAME" and len(head) > 1:
                name = head[1]
            continue
        if section == "ROWS":
            t, nm = ln.split()
            if t == "N":
                obj_row = obj_row or nm
            else:
                row_type[nm] = t
                row_order.append(nm)
        elif section == "COLUMNS":
            f = ln.split()
            col = f[0]
            if col not in cols:
                cols[col] = {}
                col_order.append(col)
            for k in range(1, len(f) - 1, 2):
                cols[col][f[k]] = float(f[k + 1])
        elif section == "RHS":
            f = ln.split()
            for k in range(1, len(f) - 1, 2):
                rhs[f[k]] = float(f[k + 1])
        elif section == "BOUNDS":
            f = ln.split()
            kind, col = f[0], f[2]
            if kind == "FR":
                lower[col] = -np.inf
            elif kind == "MI":
                lower[col] = -np.inf
            elif kind == "UP":
                upper[col] = float(f[3])
            elif kind == "LO":
                lower[col] = float(f[3])
                if lower[col] != 0.0:
                    raise FormatError("nonzero lower bounds are not supported")
            else:
                raise FormatError(f"unsupported bound type {kind}")
        elif section not in ("NAME", "ENDATA", None):
            raise FormatError(f"unsupported MPS section {section}")
    if obj_row is None:
        raise FormatError("MPS file has no objective row")

    ub_rows = [r for r in row_order if row_type[r] in ("L", "G")]
    eq_rows = [r for r in row_order if row_type[r] == "E"]
    n = len(col_order)
    c = np.array([cols[cn].get(obj_row, 0.0) for cn in col_order])

    def block(rows):
        idx = {r: i for i, r in enumerate(rows)}
        ri, ci, vals = [], [], []
        for j, cn in enumerate(col_order):
            for r, v in cols[cn].items():
                if r in idx:
                    sgn = -1.0 if row_type[r] == "G" else 1.0
                    ri.append(idx[r])
                    ci.append(j)
                    vals.append(sgn * v)
        A = sparse.csr_matrix((vals, (ri, ci)), shape=(len(rows), n))
        b = np.array([(-1.0 if row_type[r] == "G" else 1.0) * rhs.get(r, 0.0) for r in rows])
        return A, b

    A_ub, b_ub = block(ub_rows)
    A_eq, b_eq = block(eq_rows)
    nonneg = np.array([lower.get(cn, 0.0) == 0.0 for cn in col_order])
    up = np.array([upper.get(cn, np.inf) for cn in col_order])
    return StandardLP(c, A_ub, b_ub, nonneg=nonneg, var_names=col_order, A_eq=A_eq, b_eq=b_eq, upper=up,
                      row_names=ub_rows + eq_rows, name=name)


def lp_residuals(lp: StandardLP, sol: LpSolution) -> dict:
    """Primal feasibility and complementary-slackness residuals of a solution."""
    x = sol.x
    r_ub = lp.A_ub @ x - lp.b_ub
    r_eq = lp.A_eq @ x - lp.b_eq
    viol = max(float(np.max(r_ub, initial=0.0)), float(np.max(np.abs(r_eq), initial=0.0)),
               float(np.max(lp.lower - x, initial=0.0)), float(np.max(x - lp.upper, initial=0.0)))
    y = sol.duals[:lp.A_ub.shape[0]]
    cs_rows = float(np.max(np.abs(y * r_ub), initial=0.0))
    red = lp.c + lp.A_ub.T @ y + lp.A_eq.T @ sol.duals[lp.A_ub.shape[0]:]
    gap_lo = np.where(np.isfinite(lp.lower), x - lp.lower, 0.0)
    gap_hi = np.where(np.isfinite(lp.upper), lp.upper - x, 0.0)
    cs_cols = float(np.max(np.abs(np.where(red > 0, red * gap_lo, -red * gap_hi)), initial=0.0))
    return {"primal": viol, "complementary": max(cs_rows, cs_cols), "dual_sign": float(np.max(-y, initial=0.0))}

