"""Dense tableau simplex for small linear programs.

The core solves the standard form ``min c @ x  s.t.  A @ x = b, x >= 0``
with the most-negative reduced cost entering; after ``BLAND_AFTER``
consecutive degenerate pivots it switches to Bland's smallest-index rule
until progress resumes, which rules out cycling.
A starting basis may be supplied; otherwise phase one runs on artificial
variables. The tableau is rebuilt from the original data every
``refactor_every`` pivots to stop round-off drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class UnboundedError(ArithmeticError):
    pass


class InfeasibleError(ArithmeticError):
    pass


BLAND_AFTER = 20


@dataclass
class LPSolution:
    x: np.ndarray
    value: float
    basis: np.ndarray
    duals: np.ndarray
    iterations: int


def _tableau(A, b, c, basis):
    """[B^-1 A | B^-1 b] with the reduced-cost row c - c_B B^-1 A appended."""
    B = A[:, basis]
    body = np.linalg.solve(B, np.column_stack([A, b]))
    T = np.empty((A.shape[0] + 1, A.shape[1] + 1))
    T[:-1] = body
    T[-1, :-1] = c - c[basis] @ body[:, :-1]
    T[-1, -1] = -(c[basis] @ body[:, -1])
    return T


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(A, b, c, basis, tol, piv_tol, max_iter, refactor_every, allowed):
    m = A.shape[0]
    T = _tableau(A, b, c, basis)
    it = 0
    stall = 0
    while True:
        red = T[-1, :-1]
        cands = np.nonzero((red < -tol) & allowed)[0]
        if cands.size == 0:
            return T, basis, it
        if stall >= BLAND_AFTER:
            j = int(cands[0])
        else:
            j = int(cands[np.argmin(red[cands])])
        col = T[:m, j]
        pos = col > piv_tol * max(1.0, np.abs(col).max())
        if not pos.any():
            raise UnboundedError("objective is unbounded on the feasible set")
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        rmin = ratios.min()
        ties = np.nonzero(ratios <= rmin + tol * max(1.0, rmin))[0]
        r = int(ties[np.argmin(basis[ties])])
        stall = stall + 1 if rmin <= tol else 0
        _pivot(T, r, j)
        basis[r] = j
        it += 1
        if it % refactor_every == 0:
            T = _tableau(A, b, c, basis)
        if it > max_iter:
            raise ArithmeticError(f"simplex did not finish in {max_iter} pivots")


def _dual_run(A, b, c, basis, tol, piv_tol, max_iter, refactor_every):
    """Dual simplex from a dual-feasible basis until B^-1 b >= 0."""
    m = A.shape[0]
    T = _tableau(A, b, c, basis)
    scale = max(1.0, np.abs(T[:m, -1]).max())
    it = 0
    while True:
        rhs = T[:m, -1]
        r = int(np.argmin(rhs))
        if rhs[r] >= -tol * scale:
            return basis, it
        row = T[r, :-1]
        neg = np.nonzero(row < -piv_tol * max(1.0, np.abs(row).max()))[0]
        if neg.size == 0:
            raise InfeasibleError("linear program has no feasible point")
        ratios = np.maximum(T[-1, neg], 0.0) / -row[neg]
        j = int(neg[np.argmin(ratios)])
        _pivot(T, r, j)
        basis[r] = j
        it += 1
        if it % refactor_every == 0:
            T = _tableau(A, b, c, basis)
        if it > max_iter:
            raise ArithmeticError(f"dual simplex did not finish in {max_iter} pivots")


def perturbed_rhs(b, eps: float) -> np.ndarray:
    """b plus a fixed, strictly increasing ramp of relative size eps."""
    b = np.asarray(b, dtype=float)
    m = b.size
    return b + eps * max(1.0, np.abs(b).max()) * (1.0 + np.arange(m) / m)


def solve_standard(
    c,
    A,
    b,
    basis: Optional[Sequence[int]] = None,
    tol: float = 1e-11,
    piv_tol: float = 1e-9,
    max_iter: int = 100_000,
    refactor_every: int = 50,
    perturb: float = 0.0,
) -> LPSolution:
    """min c @ x subject to A x = b, x >= 0.

    With ``perturb > 0`` the pivots run on ``perturbed_rhs(b, perturb)``,
    which is nondegenerate in practice and avoids long stalls; a short dual
    simplex pass then restores the exact right-hand side. A supplied basis
    must be feasible for the perturbed right-hand side.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b_exact = np.asarray(b, dtype=float)
    b = perturbed_rhs(b_exact, perturb) if perturb > 0 else b_exact
    m, n = A.shape
    it1 = 0
    if basis is None:
        sign = np.where(b < 0, -1.0, 1.0)
        A1 = np.hstack([A * sign[:, None], np.eye(m)])
        b1 = b * sign
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        basis1 = np.arange(n, n + m)
        T, basis1, it1 = _run(A1, b1, c1, basis1, tol, piv_tol, max_iter, refactor_every,
                              np.ones(n + m, dtype=bool))
        if -T[-1, -1] > 1e-9 * max(1.0, np.abs(b).max()):
            raise InfeasibleError("linear program has no feasible point")
        # drive remaining artificials out of the basis
        for r in np.nonzero(basis1 >= n)[0]:
            nz = np.nonzero(np.abs(T[r, :n]) > piv_tol)[0]
            if nz.size == 0:
                raise ArithmeticError("redundant equality constraints are not supported")
            _pivot(T, r, int(nz[0]))
            basis1[r] = nz[0]
        basis = basis1
    basis = np.array(basis, dtype=int)
    if np.linalg.matrix_rank(A[:, basis]) < m:
        raise ArithmeticError("starting basis is singular")
    T, basis, it2 = _run(A, b, c, basis, tol, piv_tol, max_iter, refactor_every,
                         np.ones(n, dtype=bool))
    if perturb > 0:
        b = b_exact
        basis, it3 = _dual_run(A, b, c, basis, tol, piv_tol, max_iter, refactor_every)
        # round-off in the dual pass can leave a slightly negative reduced cost
        T, basis, it4 = _run(A, b, c, basis, tol, piv_tol, max_iter, refactor_every,
                             np.ones(n, dtype=bool))
        it2 += it3 + it4
    T = _tableau(A, b, c, basis)
    x = np.zeros(n)
    x[basis] = T[:-1, -1]
    # round-off in B^-1 b grows with the conditioning of the final basis
    feas_tol = max(1e-9, 1e-14 * np.linalg.cond(A[:, basis]))
    if x.min() < -feas_tol * max(1.0, np.abs(x).max()):
        raise ArithmeticError(f"simplex finished on an infeasible basis (min x = {x.min():.3g}, max x = {np.abs(x).max():.3g})")
    duals = np.linalg.solve(A[:, basis].T, c[basis])
    return LPSolution(x, float(c @ x), basis, duals, it1 + it2)


def simplex_max(c, A_ub, b_ub, **kw) -> LPSolution:
    """max c @ x subject to A_ub x <= b_ub, x >= 0 (slack form)."""
    c = np.asarray(c, dtype=float)
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.asarray(b_ub, dtype=float)
    m, n = A_ub.shape
    A = np.hstack([A_ub, np.eye(m)])
    cc = np.concatenate([-c, np.zeros(m)])
    basis = np.arange(n, n + m) if np.all(b_ub >= 0) else None
    sol = solve_standard(cc, A, b_ub, basis, **kw)
    return LPSolution(sol.x[:n], -sol.value, sol.basis, -sol.duals, sol.iterations)
