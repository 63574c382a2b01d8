"""Linkage, bearing constants, coherence and optimality certificates.

Notation follows the rest of the package: ``B`` is a bearing matrix with
one row per shapelet, ``beta = B alpha`` is the plateau value of
``L_alpha`` per shapelet, and ``p`` / ``q`` are the positive / negative
field masses per shapelet. Shapelet sets:

* ``G0`` (null valued, ``beta = 0``) and ``G1`` (unit valued, ``beta = 1``),
* ``G0m`` (``beta < 0``) and ``G1p`` (``beta > 1``).

All membership tests use the band ``EPS_BETA``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import sparse

from . import lp as lpmod
from .composer import AlphaVector, Composition, energy, realize
from .dictionary import Dictionary
from .dsd import ShapeletDecomposition, beta_of, decompose
from .errors import (
    BoundsViolatedError,
    HypothesisViolatedError,
    LinkageNotUniqueError,
    RedundantCompositionError,
    SingularSystemError,
)
from .imaging import DeltaField

EPS_BETA = 1e-6


# --- linkage -----------------------------------------------------------------


@dataclass(eq=False)
class LinkageResult:
    """Canonical coefficients of a composition.

    ``columns`` lists dictionary indices in the order used by ``alpha_r`` and
    by the columns of ``decomp.bearing``: sorted I_plus, then sorted I_minus.
    ``gamma0`` / ``gamma1`` index shapelets of ``decomp``.
    """

    comp: Composition
    columns: tuple[int, ...]
    alpha_r: np.ndarray
    basic: bool
    gamma0: np.ndarray
    gamma1: np.ndarray
    decomp: ShapeletDecomposition = field(repr=False)
    beta: np.ndarray = field(repr=False, default=None)

    @property
    def n_plus(self) -> int:
        return len(self.comp.i_plus)

    @property
    def n_minus(self) -> int:
        return len(self.comp.i_minus)

    def as_alpha(self, n_shapes: int) -> np.ndarray:
        """Full-length coefficient vector (zeros off the composition)."""
        a = np.zeros(n_shapes)
        a[list(self.columns)] = self.alpha_r
        return a

    def square_block(self) -> np.ndarray:
        """``B^R`` restricted to rows G0 then G1 (ascending within each)."""
        rows = np.concatenate([self.gamma0, self.gamma1]).astype(np.int64)
        return self.decomp.bearing[rows].astype(float)


def is_redundant(dictionary: Dictionary, comp: Composition) -> bool:
    """True when dropping some element leaves the realized region's cell count unchanged."""
    full = len(realize(comp, dictionary))
    for j in comp.i_plus:
        if len(realize(Composition(tuple(k for k in comp.i_plus if k != j), comp.i_minus), dictionary)) == full:
            return True
    for j in comp.i_minus:
        if len(realize(Composition(comp.i_plus, tuple(k for k in comp.i_minus if k != j)), dictionary)) == full:
            return True
    return False


def linkage(dictionary: Dictionary, comp: Composition, require_basic: bool = True,
            tol: float = EPS_BETA) -> LinkageResult:
    """Coefficients with ``alpha = 1`` on I_plus and the largest-sum ``alpha`` on I_minus.

    The I_minus part solves ``max sum(alpha_minus)`` subject to
    ``L_alpha <= 0`` on every shapelet of the composition's own
    decomposition that lies outside the realized region.
    """
    comp.check(dictionary.n_shapes)
    if comp.size == 0:
        raise ValueError("linkage of an empty composition is undefined")
    if is_redundant(dictionary, comp):
        raise RedundantCompositionError(f"composition {comp} is redundant")
    cols = tuple(comp.i_plus) + tuple(comp.i_minus)
    n_plus, n_minus = len(comp.i_plus), len(comp.i_minus)
    dec = decompose([dictionary.shapes[j] for j in cols], source_ids=cols)
    B = dec.bearing.astype(float)
    plus_cover = B[:, :n_plus].sum(axis=1)
    inside = (plus_cover > 0) & ~(B[:, n_plus:] > 0).any(axis=1)
    alpha = np.ones(n_plus + n_minus)
    if n_minus:
        out = ~inside
        prob = lpmod.StandardLP(-np.ones(n_minus), sparse.csr_matrix(B[out][:, n_plus:]), -plus_cover[out],
                                nonneg=np.zeros(n_minus, dtype=bool))
        sol = lpmod.solve(prob)
        if not sol.ok:
            raise LinkageNotUniqueError(f"linkage LP status: {sol.status}")
        alpha[n_plus:] = sol.x
    beta = B @ alpha
    gamma1 = np.flatnonzero(np.abs(beta - 1.0) <= tol)
    gamma0 = np.flatnonzero(np.abs(beta) <= tol)
    basic = len(gamma1) == n_plus and len(gamma0) == n_minus
    if basic:
        sq = B[np.concatenate([gamma0, gamma1])]
        basic = np.linalg.matrix_rank(sq) == n_plus + n_minus
    if require_basic and not basic:
        raise LinkageNotUniqueError(
            f"composition is not basic: {len(gamma1)} unit / {len(gamma0)} null shapelets "
            f"for n_plus={n_plus}, n_minus={n_minus}")
    return LinkageResult(comp, cols, alpha, bool(basic), gamma0, gamma1, dec, beta)


def bearing_constants(linkres: LinkageResult, check: bool = True, tol: float = 1e-9) -> np.ndarray:
    """Solve ``(B^R_{G0 u G1,:})^T w = c`` with ``c = +1`` on I_plus and ``-1`` on I_minus.

    ``w`` is ordered like :meth:`LinkageResult.square_block` (G0 rows then G1
    rows). With `check` the bounds ``1 <= w_G1 <= 1 + n_minus`` and
    ``-1 <= w_G0 < 0`` are enforced.
    """
    if not linkres.basic:
        raise LinkageNotUniqueError("bearing constants need a basic composition")
    M = linkres.square_block()
    if M.shape[0] != M.shape[1]:
        raise SingularSystemError("bearing block is not square")
    c = np.concatenate([np.ones(linkres.n_plus), -np.ones(linkres.n_minus)])
    try:
        w = np.linalg.solve(M.T, c)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.allclose(M.T @ w, c, rtol=0, atol=1e-10):
        raise SingularSystemError("bearing system is numerically singular")
    if check:
        k0 = len(linkres.gamma0)
        w0, w1 = w[:k0], w[k0:]
        ok = (np.all(w1 >= 1 - tol) and np.all(w1 <= 1 + linkres.n_minus + tol)
              and np.all(w0 >= -1 - tol) and np.all(w0 < 0))
        if not ok:
            raise BoundsViolatedError(f"bearing constants out of bounds: w={w}")
    return w


# --- cell bookkeeping shared by coherence and the recovery checker -----------


@dataclass(eq=False)
class _CellMap:
    rows: np.ndarray  # R-shapelet rows in G0-then-G1 order
    members: list  # members[k] = full-decomposition cells inside rows[k]
    cell_owner: np.ndarray  # per full cell, R-shapelet index or -1 (the set T)


def _cell_map(linkres: LinkageResult, cells: ShapeletDecomposition) -> _CellMap:
    owner = np.array([linkres.decomp.cell_shapelet[s[0]] for s in cells.shapelets], dtype=np.int64)
    rows = np.concatenate([linkres.gamma0, linkres.gamma1]).astype(np.int64)
    members = [np.flatnonzero(owner == r) for r in rows]
    return _CellMap(rows, members, owner)


def coherence(dictionary: Dictionary, comp: Composition, w, cells: ShapeletDecomposition,
              linkres: LinkageResult | None = None) -> dict[int, float]:
    """``Coh(S_j, R) = |sum_l gamma_lj w_l|`` for every exterior shape j.

    ``gamma_lj`` is the fraction of the cells of R-shapelet ``l`` that lie in
    ``S_j``; `cells` must decompose the whole dictionary.
    """
    linkres = linkres or linkage(dictionary, comp)
    gam = _gamma(linkres, cells, _cell_map(linkres, cells))
    w = np.asarray(w, dtype=float)
    ext = [j for j in range(dictionary.n_shapes) if j not in set(linkres.columns)]
    return {j: float(abs(gam[:, j] @ w)) for j in ext}


def _gamma(linkres: LinkageResult, cells: ShapeletDecomposition, cmap: _CellMap) -> np.ndarray:
    Bf = cells.bearing.astype(float)
    return np.stack([Bf[m].mean(axis=0) if m.size else np.zeros(Bf.shape[1]) for m in cmap.members])


# --- LOC violation quantities -------------------------------------------------


@dataclass(eq=False)
class LocViolation:
    beta_cells: np.ndarray  # beta* per full-dictionary cell
    e: np.ndarray  # per dictionary shape
    eps_lv: np.ndarray  # per R-shapelet in G0-then-G1 order
    eps_i: dict  # full cell index -> epsilon_i
    delta_j: dict  # exterior shape -> delta_j
    t_cells: np.ndarray  # full cells outside every composition element


def loc_violation(dictionary: Dictionary, comp: Composition, decomp_full: ShapeletDecomposition,
                  linkres: LinkageResult | None = None, w=None, tol: float = EPS_BETA) -> LocViolation:
    linkres = linkres or linkage(dictionary, comp)
    if not linkres.basic:
        raise LinkageNotUniqueError("LOC quantities need a basic composition")
    if decomp_full.p is None:
        raise ValueError("the full decomposition must carry p and q")
    w = bearing_constants(linkres) if w is None else np.asarray(w, dtype=float)
    cmap = _cell_map(linkres, decomp_full)
    p, q = decomp_full.p, decomp_full.q
    Bf = decomp_full.bearing.astype(float)
    beta_cells = np.where(cmap.cell_owner >= 0, linkres.beta[np.maximum(cmap.cell_owner, 0)], 0.0)
    above = beta_cells > 1 + tol
    below = beta_cells < -tol
    e = Bf.T @ np.where(above, p, 0.0) - Bf.T @ np.where(below, q, 0.0)
    M = linkres.square_block()
    try:
        eps_lv = np.linalg.solve(M.T, e[list(linkres.columns)])
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    k0 = len(linkres.gamma0)
    eps_i = {}
    for k, cells in enumerate(cmap.members):
        J = len(cells)
        for i in cells:
            if k < k0:
                eps_i[int(i)] = (eps_lv[k] - q[i] * J) / abs(w[k])
            else:
                eps_i[int(i)] = -(eps_lv[k] + p[i] * J) / abs(w[k])
    t_cells = np.flatnonzero(cmap.cell_owner < 0)
    gam = _gamma(linkres, decomp_full, cmap)
    in_t = np.zeros(decomp_full.n_shapelets, dtype=bool)
    in_t[t_cells] = True
    excess = np.where(in_t, np.maximum(q - p, 0.0), 0.0)
    delta_j = {}
    for j in range(dictionary.n_shapes):
        if j in set(linkres.columns):
            continue
        delta_j[j] = float(abs(-e[j] + gam[:, j] @ eps_lv) + Bf[:, j] @ excess)
    return LocViolation(beta_cells, e, eps_lv, eps_i, delta_j, t_cells)


# --- recovery checker ----------------------------------------------------------


@dataclass(eq=False)
class RecoveryReport:
    eta_c: float
    eta_c_range: tuple[float, float]
    w: np.ndarray
    eps_lv: np.ndarray
    eps_i: dict
    delta_j: dict
    coh_j: dict
    cell_margins: dict  # cell -> p_i (or q_i) minus its required lower bound
    shape_margins: dict  # exterior shape -> (1 - delta_j / eta_c) - Coh_j
    eta_margin: float  # eta_c - max(0, eps_i)
    t_cells_positive: bool  # informational
    conditions: dict
    conditions_met: bool
    alpha_r: np.ndarray
    columns: tuple

    def to_dict(self) -> dict:
        def fl(v):
            return float(v) + 0.0  # plain floats, no negative zeros

        def fmap(d):
            return {str(k): fl(v) for k, v in d.items()}

        return {
            "eta_c": fl(self.eta_c),
            "eta_c_range": [fl(v) for v in self.eta_c_range],
            "w": [fl(v) for v in self.w],
            "eps_lv": [fl(v) for v in self.eps_lv],
            "eps_i": fmap(self.eps_i),
            "delta_j": fmap(self.delta_j),
            "coh_j": fmap(self.coh_j),
            "cell_margins": fmap(self.cell_margins),
            "shape_margins": fmap(self.shape_margins),
            "eta_margin": fl(self.eta_margin),
            "t_cells_positive": bool(self.t_cells_positive),
            "conditions": {k: bool(v) for k, v in self.conditions.items()},
            "conditions_met": bool(self.conditions_met),
            "alpha_r": [fl(v) for v in self.alpha_r],
            "columns": [int(v) for v in self.columns],
        }


def check_recovery(dictionary: Dictionary, delta: DeltaField, comp: Composition,
                   eta_c: float | None = None) -> RecoveryReport:
    """Evaluate the sufficient conditions for exact recovery of `comp`.

    Per cell inside the composition (G0 cells need the first, G1 cells the
    second):

        p_i > |w_l| / |J_l| * (eta_c - eps_i)     or
        q_i > |w_l| / |J_l| * (eta_c - eps_i)

    and per exterior shape ``Coh_j < 1 - delta_j / eta_c``, for some
    ``eta_c > max(0, eps_i)``. Whether every cell covered only by exterior
    shapes carries positive mass ``p_i`` is reported separately
    (``t_cells_positive``) and is not part of ``conditions_met``. With ``eta_c=None`` the midpoint of
    the interval of admissible values is used when it is nonempty.
    """
    linkres = linkage(dictionary, comp)
    w = bearing_constants(linkres)
    full = decompose(dictionary.shapes, delta)
    lv = loc_violation(dictionary, comp, full, linkres, w)
    cmap = _cell_map(linkres, full)
    coh = coherence(dictionary, comp, w, full, linkres)
    p, q = full.p, full.q
    k0 = len(linkres.gamma0)

    lower = max([0.0] + list(lv.eps_i.values()))
    upper = np.inf
    for k, cells in enumerate(cmap.members):
        J = len(cells)
        for i in cells:
            mass = p[i] if k < k0 else q[i]
            upper = min(upper, lv.eps_i[int(i)] + mass * J / abs(w[k]))
    for j, c in coh.items():
        if c >= 1.0:
            upper = -np.inf
        else:
            lower = max(lower, lv.delta_j[j] / (1.0 - c))
    if eta_c is None:
        if upper > lower:
            eta_c = 0.5 * (lower + upper) if np.isfinite(upper) else 2.0 * lower + 1.0
        else:
            eta_c = lower if lower > 0 else 1.0
    eta_c = float(eta_c)

    cell_margins = {}
    for k, cells in enumerate(cmap.members):
        J = len(cells)
        for i in cells:
            mass = p[i] if k < k0 else q[i]
            cell_margins[int(i)] = float(mass - abs(w[k]) / J * (eta_c - lv.eps_i[int(i)]))
    shape_margins = {j: float(1.0 - lv.delta_j[j] / eta_c - coh[j]) for j in coh}
    eta_margin = eta_c - lower_eps(lv)
    t_pos = bool(np.all(p[lv.t_cells] > 0))
    conditions = {
        "eta_c_admissible": bool(eta_margin > 0),
        "cell_masses": bool(all(m > 0 for m in cell_margins.values())),
        "coherence": bool(all(m > 0 for m in shape_margins.values())),
    }
    return RecoveryReport(eta_c, (float(lower), float(upper)), w, lv.eps_lv, lv.eps_i, lv.delta_j, coh,
                          cell_margins, shape_margins, float(eta_margin), t_pos, conditions,
                          all(conditions.values()), linkres.alpha_r.copy(), linkres.columns)


def lower_eps(lv: LocViolation) -> float:
    return max([0.0] + list(lv.eps_i.values()))


# --- unique optimality certificate ---------------------------------------------


@dataclass(eq=False)
class Certificate:
    status: str  # feasible | indeterminate | infeasible
    feasible: bool
    margin: float
    eta: np.ndarray
    eta_c: float
    eta_c_range: tuple[float, float]
    gamma_sets: dict
    e: np.ndarray
    l: np.ndarray
    u: np.ndarray
    c: np.ndarray
    rank_ok: bool

    def to_dict(self) -> dict:
        return {
            "status": self.status, "feasible": self.feasible, "margin": self.margin,
            "eta": self.eta.tolist(), "eta_c": self.eta_c, "eta_c_range": list(self.eta_c_range),
            "gamma_sets": {k: [int(v) for v in s] for k, s in self.gamma_sets.items()},
            "e": self.e.tolist(), "l": self.l.tolist(), "u": self.u.tolist(), "c": self.c.tolist(),
            "rank_ok": self.rank_ok,
        }


def gamma_sets(beta, tol: float = EPS_BETA) -> dict:
    beta = np.asarray(beta, dtype=float)
    return {
        "G0": np.flatnonzero(np.abs(beta) <= tol),
        "G1": np.flatnonzero(np.abs(beta - 1) <= tol),
        "G0m": np.flatnonzero(beta < -tol),
        "G1p": np.flatnonzero(beta > 1 + tol),
    }


def check_unique_optimality(decomp_full: ShapeletDecomposition, alpha_star, tau: float,
                            tol: float = EPS_BETA, margin_tol: float = 1e-9) -> Certificate:
    """Search for a dual certificate that `alpha_star` uniquely minimizes the budgeted problem.

    Finds ``eta`` and ``eta_c > 0`` with
    ``B_{G0 u G1,:}^T eta = eta_c c + e``, ``c_j = sign(alpha_j)`` on the
    support and ``|c_j| < 1`` elsewhere, and ``l < eta < u``, by an LP that
    maximizes the smallest slack ``t``. The certificate is feasible when
    ``t > margin_tol`` and ``B_{G0 u G1, supp}`` has full column rank.
    """
    if decomp_full.p is None:
        raise ValueError("decomposition needs p and q")
    alpha = np.asarray(getattr(alpha_star, "alpha", alpha_star), dtype=float)
    if abs(np.abs(alpha).sum() - tau) > tol * max(1.0, tau):
        raise HypothesisViolatedError(f"||alpha||_1 = {np.abs(alpha).sum()} differs from tau = {tau}")
    beta = beta_of(decomp_full, alpha)
    inside = (beta > tol) & (beta < 1 - tol)
    if np.any(inside):
        raise HypothesisViolatedError(f"{int(inside.sum())} shapelet values lie in (0, 1)")
    gs = gamma_sets(beta, tol)
    B = decomp_full.bearing.astype(float)
    p, q = decomp_full.p, decomp_full.q
    e = B[gs["G1p"]].T @ p[gs["G1p"]] - B[gs["G0m"]].T @ q[gs["G0m"]]
    rows = np.concatenate([gs["G0"], gs["G1"]])
    k0 = len(gs["G0"])
    l = np.concatenate([q[gs["G0"]] - p[gs["G0"]], -p[gs["G1"]]]) + 0.0  # no negative zeros in reports
    u = np.concatenate([q[gs["G0"]], q[gs["G1"]] - p[gs["G1"]]])
    supp = np.flatnonzero(np.abs(alpha) > tol * max(1.0, np.abs(alpha).max(initial=0.0)))
    off = np.setdiff1d(np.arange(B.shape[1]), supp)
    Bs = B[rows]
    rank_ok = bool(supp.size == 0 or np.linalg.matrix_rank(Bs[:, supp]) == supp.size)
    sgn = np.sign(alpha[supp])

    k = rows.size
    # variables: eta (k, free), eta_c (>= 0), t (free, <= 1)
    nv = k + 2
    ic, it = k, k + 1
    ub_rows, ub_rhs = [], []

    def row(coef_eta=None, coef_c=0.0, coef_t=0.0):
        r = np.zeros(nv)
        if coef_eta is not None:
            r[:k] = coef_eta
        r[ic], r[it] = coef_c, coef_t
        return r

    for jj in off:
        col = Bs[:, jj]
        ub_rows.append(row(col, -1.0, 1.0)); ub_rhs.append(e[jj])
        ub_rows.append(row(-col, -1.0, 1.0)); ub_rhs.append(-e[jj])
    for i in range(k):
        unit = np.zeros(k); unit[i] = 1.0
        ub_rows.append(row(-unit, 0.0, 1.0)); ub_rhs.append(-l[i])
        ub_rows.append(row(unit, 0.0, 1.0)); ub_rhs.append(u[i])
    ub_rows.append(row(None, -1.0, 1.0)); ub_rhs.append(0.0)
    eq_rows = [row(Bs[:, jj], -s, 0.0) for jj, s in zip(supp, sgn)]
    eq_rhs = [e[jj] for jj in supp]
    A_ub = sparse.csr_matrix(np.array(ub_rows)) if ub_rows else None
    A_eq = sparse.csr_matrix(np.array(eq_rows).reshape(-1, nv))
    nonneg = np.zeros(nv, dtype=bool)
    nonneg[ic] = True
    upper = np.full(nv, np.inf)
    upper[it] = 1.0
    cvec = np.zeros(nv)
    cvec[it] = -1.0
    prob = lpmod.StandardLP(cvec, A_ub, np.array(ub_rhs), nonneg=nonneg, A_eq=A_eq, b_eq=np.array(eq_rhs),
                            upper=upper)
    sol = lpmod.solve(prob)
    gsets = {k_: v for k_, v in gs.items()}
    if not sol.ok:
        return Certificate("infeasible", False, -np.inf, np.zeros(k), 0.0, (np.nan, np.nan), gsets, e, l, u,
                           np.zeros(B.shape[1]), rank_ok)
    margin = float(sol.x[it])
    eta, etac = sol.x[:k], float(sol.x[ic])
    cfull = np.zeros(B.shape[1])
    if etac > 0:
        cfull = (Bs.T @ eta - e) / etac
    # range of eta_c over the closure (t >= 0)
    rng = []
    for sign in (1.0, -1.0):
        cc = np.zeros(nv)
        cc[ic] = sign
        lo_t = np.zeros(nv)
        lo_t[it] = -1.0
        A2 = sparse.vstack([prob.A_ub, sparse.csr_matrix(lo_t)]) if prob.A_ub.shape[0] else sparse.csr_matrix(lo_t)
        b2 = np.concatenate([prob.b_ub, [0.0]])
        s2 = lpmod.solve(lpmod.StandardLP(cc, A2, b2, nonneg=nonneg, A_eq=prob.A_eq, b_eq=prob.b_eq, upper=upper))
        if s2.ok:
            rng.append(float(s2.x[ic]))
        else:
            rng.append(np.inf if sign < 0 and s2.status == lpmod.UNBOUNDED else np.nan)
    if margin > margin_tol and rank_ok:
        status = "feasible"
    elif margin >= -margin_tol:
        status = "indeterminate"
    else:
        status = "infeasible"
    return Certificate(status, status == "feasible", margin, eta, etac, (rng[0], rng[1]), gsets, e, l, u,
                       cfull, rank_ok)


# --- approximation-gap diagnostics -------------------------------------------


@dataclass
class EpsilonDiagnostics:
    eps_1plus: float
    eps_0minus: float
    G: float
    E: float
    residual: float  # G - E - (eps_1plus + eps_0minus)
    characterizes: bool  # L_alpha avoids (0, 1) and {L >= 1} is the support composition's region

    @property
    def eps_total(self) -> float:
        return self.eps_1plus + self.eps_0minus


def level_function(dictionary: Dictionary, alpha) -> np.ndarray:
    """``L_alpha`` per grid cell."""
    alpha = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    return dictionary.membership() @ alpha


def epsilon_diagnostics(dictionary: Dictionary, delta: DeltaField, alpha, tol: float = EPS_BETA,
                        check: bool = True) -> EpsilonDiagnostics:
    """Gap terms ``eps_1plus`` (mass of ``delta+`` where ``L > 1``) and ``eps_0minus`` (``delta-`` where ``L < 0``).

    ``E`` is the energy of the composition read from the signs of `alpha`.
    When `alpha` characterizes that composition the identity
    ``G - E = eps_1plus + eps_0minus`` holds; with `check` a violation above
    ``1e-10`` (relative) raises ``AssertionError``.
    """
    alpha = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    L = level_function(dictionary, alpha)
    d = delta.delta
    vol = dictionary.grid.cell_volume
    eps1 = float(np.sum(np.where(L > 1 + tol, np.maximum(d, 0.0) * (L - 1), 0.0)) * vol)
    eps0 = float(np.sum(np.where(L < -tol, np.maximum(-d, 0.0) * np.abs(L), 0.0)) * vol)
    w = d * vol
    G = float(np.sum(np.maximum(w * L, np.minimum(w, 0.0))))
    comp = AlphaVector(alpha).composition()
    E = energy(comp, dictionary, delta)
    region = np.zeros(dictionary.grid.size, dtype=bool)
    region[realize(comp, dictionary).cells] = True
    avoids = not np.any((L > tol) & (L < 1 - tol))
    characterizes = bool(avoids and np.array_equal(region, L >= 1 - tol))
    residual = G - E - (eps1 + eps0)
    if check and characterizes:
        scale = 1.0 + float(np.sum(np.abs(w) * (1 + np.abs(L))))
        if abs(residual) > 1e-10 * scale:
            raise AssertionError(f"gap identity violated: residual {residual!r}")
    return EpsilonDiagnostics(eps1, eps0, G, E, residual, characterizes)


# --- reporting ------------------------------------------------------------------


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def to_json(obj) -> str:
    data = obj.to_dict() if hasattr(obj, "to_dict") else asdict(obj)
    return json.dumps(_plain(data), indent=2, sort_keys=True, allow_nan=True)


def to_text(obj) -> str:
    """``key: value`` block, one line per top-level field."""
    data = obj.to_dict() if hasattr(obj, "to_dict") else asdict(obj)
    lines = []
    for k in data:
        v = _plain(data[k])
        lines.append(f"{k}: {json.dumps(v) if isinstance(v, (list, dict)) else v}")
    return "\n".join(lines) + "\n"
