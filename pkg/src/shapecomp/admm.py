"""Consensus ADMM for the composition problem.

Every cell contributes a term ``g_i(alpha) = max(a_i^T alpha, b_i)``; the
budget (or l1 penalty) is the consensus term ``f``. With zero start the
iteration is

    alpha_i <- prox_{xi g_i}(rho - omega_i)
    rho     <- prox_{(xi/N) f}(mean(alpha_i) + mean(omega_i))
    omega_i <- omega_i + alpha_i - rho

The prox of a max-affine term moves its argument along ``a_i`` only, so
``prox(v) = v - t_i a_i`` for a scalar ``t_i``. Unrolling the updates gives
``omega_i = (rho_prev - rho) - t_i a_i``, and the whole state reduces to
``rho``, the previous ``rho`` and one scalar per row. :func:`solve_admm`
runs this reduced form; :func:`solve_admm_naive` keeps every per-row vector
and exists to check the reduction.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .composer import ProblemData, objective


def prox_max_affine(a, b: float, xi: float, rho) -> np.ndarray:
    """``argmin_x max(a^T x, b) + ||x - rho||^2 / (2 xi)`` in closed form."""
    a = np.asarray(a, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if xi <= 0:
        raise ValueError("xi must be positive")
    aa = float(a @ a)
    if aa == 0.0:
        return rho.copy()
    s = float(a @ rho)
    if s > b + xi * aa:
        return rho - xi * a
    if s >= b:
        # same as rho - (a a^T / aa) rho + (b / aa) a, written so that the
        # branches meet exactly: t = 0 at s = b and t = xi at s = b + xi aa
        return rho - ((s - b) / aa) * a
    return rho.copy()


def _prox_coef(s, b, xi, aa):
    # scalar t with prox(v) = v - t a, vectorized over rows; zero rows give t = 0
    t = np.zeros_like(s)
    nz = aa > 0
    hi = nz & (s > b + xi * aa)
    mid = nz & ~hi & (s >= b)
    t[hi] = xi
    t[mid] = (s[mid] - b[mid]) / aa[mid]
    return t


def project_l1_ball(v, tau: float) -> np.ndarray:
    """Euclidean projection onto ``{x : ||x||_1 <= tau}`` by sorting."""
    v = np.asarray(v, dtype=float)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    av = np.abs(v)
    if av.sum() <= tau:
        return v.copy()
    if tau == 0:
        return np.zeros_like(v)
    u = np.sort(av)[::-1]
    css = np.cumsum(u) - tau
    k = np.arange(1, u.size + 1)
    r = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[r] / (r + 1)
    x = np.sign(v) * np.maximum(av - theta, 0.0)
    s = np.abs(x).sum()
    if s > tau:
        x *= tau / s
    return x


def soft_threshold(v, kappa: float) -> np.ndarray:
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


@dataclass
class AdmmResult:
    alpha: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: np.ndarray = field(repr=False)  # columns: iter, primal_res, dual_res, objective

    @property
    def status(self) -> str:
        return "converged" if self.converged else "iteration-limit"


def _consensus_prox(pd: ProblemData, xi: float, n_terms: int):
    if pd.tau is not None:
        tau = pd.tau
        return lambda v: project_l1_ball(v, tau)
    kappa = xi * pd.lam / n_terms
    return lambda v: soft_threshold(v, kappa)


def _posed_objective(pd: ProblemData, alpha) -> float:
    val = objective(pd, alpha)
    if pd.lam is not None:
        val += pd.lam * float(np.abs(alpha).sum())
    return val


def solve_admm(pd: ProblemData, xi: float = 1.0, max_iters: int = 5000, tol_primal: float = 1e-6,
               tol_dual: float = 1e-6, workers: int = 1, trace_every: int = 1) -> AdmmResult:
    """Run consensus ADMM from zero; return ``rho`` and the residual trace.

    Stops when ``||mean(alpha) - rho|| <= tol_primal sqrt(n)`` and
    ``||rho_new - rho|| <= tol_dual sqrt(n)``. `workers` splits the per-row
    prox sweep into chunks; the result does not depend on it.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    A = pd.A
    At = A.T.tocsr()
    N, n = A.shape
    b = pd.b
    aa = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    prox_f = _consensus_prox(pd, xi, N)
    rho = np.zeros(n)
    d = np.zeros(n)
    s = np.zeros(N)
    chunks = np.array_split(np.arange(N), max(1, int(workers))) if workers > 1 else None
    pool = ThreadPoolExecutor(max_workers=workers) if chunks is not None else None
    sq = np.sqrt(n)
    rows = []
    converged = False
    k = 0
    try:
        for k in range(1, max_iters + 1):
            lin = A @ (rho - d) + s * aa
            if pool is None:
                t = _prox_coef(lin, b, xi, aa)
            else:
                t = np.empty(N)

                def work(idx):
                    t[idx] = _prox_coef(lin[idx], b[idx], xi, aa[idx])

                list(pool.map(work, chunks))
            shift = At @ t / N
            rho_new = prox_f(rho - shift)
            alpha_bar = rho - d + (At @ (s - t)) / N
            r_p = float(np.linalg.norm(alpha_bar - rho_new))
            r_d = float(np.linalg.norm(rho_new - rho))
            d = rho - rho_new
            rho = rho_new
            s = t
            if k % trace_every == 0 or k == 1:
                rows.append((k, r_p, r_d, _posed_objective(pd, rho)))
            if r_p <= tol_primal * sq and r_d <= tol_dual * sq:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    if not rows or rows[-1][0] != k:
        rows.append((k, r_p, r_d, _posed_objective(pd, rho)))
    return AdmmResult(rho, _posed_objective(pd, rho), k, converged, np.array(rows, dtype=float))


def solve_admm_naive(pd: ProblemData, xi: float = 1.0, iters: int = 100) -> tuple[np.ndarray, list[np.ndarray]]:
    """Textbook form with one alpha_i and omega_i per row (memory N x n); returns rho and its history."""
    A = pd.A.toarray()
    N, n = A.shape
    prox_f = _consensus_prox(pd, xi, N)
    alpha = np.zeros((N, n))
    omega = np.zeros((N, n))
    rho = np.zeros(n)
    hist = []
    for _ in range(iters):
        for i in range(N):
            alpha[i] = prox_max_affine(A[i], pd.b[i], xi, rho - omega[i])
        rho = prox_f(alpha.mean(axis=0) + omega.mean(axis=0))
        omega += alpha - rho
        hist.append(rho.copy())
    return rho, hist


def write_trace(path, result: AdmmResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "primal_res", "dual_res", "objective"])
        for it, rp, rd, obj in result.trace:
            w.writerow([int(it), repr(float(rp)), repr(float(rd)), repr(float(obj))])
