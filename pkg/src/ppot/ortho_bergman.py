"""Weighted Vandermonde matrices, orthonormal bases and Bergman functions.

Every evaluation goes through a *column family*: a fixed spanning set of the
theta-incomplete space, returned in log-scaled form ``exp(ls[i]) * S[i, j]``
so that degrees of a few hundred can be evaluated far outside the unit disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.special import gammaln

from .geometry_measure import (
    Annulus,
    Circle,
    Interval,
    Plane,
    ProductOfDisks,
    QuadratureRule,
    WeightSpec,
    gaussian_weight,
)
from .index_core import IncompleteIndexSet, Theta, dim, enumerate_index_set
from .poly_core import MultiPolynomial, as_points, dumps, monomial_matrix

REORTH_KAPPA = 1e6
RANK_TOL = 1e-13
MOMENT_RTOL = 1e-8


class ResolutionError(ValueError):
    pass


class RankDeficiencyError(ArithmeticError):
    def __init__(self, alpha, ratio):
        super().__init__(
            f"numerically dependent column at multi-index {alpha} "
            f"(relative singular value {ratio:.3e})"
        )
        self.alpha = alpha


# --- column families ----------------------------------------------------------


@dataclass(frozen=True)
class MonomialFamily:
    """Columns (z / s)**alpha."""

    idx: IncompleteIndexSet
    scale: float = 1.0

    name = "monomial"

    def log_columns(self, pts):
        pts = as_points(pts, self.idx.dim_space)
        alphas = np.array(self.idx.indices, dtype=int).reshape(-1, self.idx.dim_space)
        degs = alphas.sum(axis=1)
        top = self.idx.N
        t = np.maximum(1.0, np.abs(pts).max(axis=1) / self.scale)
        S = monomial_matrix(pts / (self.scale * t[:, None]), alphas)
        with np.errstate(under="ignore"):
            S *= np.exp(np.outer(np.log(t), degs - top))
        return top * np.log(t), S

    def monomial_coefficients(self) -> np.ndarray:
        """T[i, j]: coefficient of z**alpha_i in column j."""
        degs = np.array(self.idx.degrees(), dtype=float)
        return np.diag(self.scale ** (-degs))


@dataclass(frozen=True)
class ChebyshevBandFamily:
    """One-variable columns (z / s)**m * T_j((z - c) / h), j = 0..N-m.

    Spans the same band as the monomials but stays well conditioned on real
    intervals, where monomial Vandermonde matrices lose rank near N = 40.
    """

    idx: IncompleteIndexSet
    center: float
    half: float
    scale: float = 1.0

    name = "chebyshev"

    def log_columns(self, pts):
        z = as_points(pts, 1)[:, 0]
        m, L = self.idx.low, self.idx.N - self.idx.low
        x = (z - self.center) / self.half
        rho = x + np.sqrt(x - 1) * np.sqrt(x + 1)
        rho_n = np.maximum(1.0, np.maximum(np.abs(rho), 1 / np.maximum(np.abs(rho), 1e-300)))
        U = np.empty((z.size, L + 1), dtype=complex)
        U[:, 0] = 1.0
        if L >= 1:
            U[:, 1] = x / rho_n
        for j in range(1, L):
            U[:, j + 1] = 2 * x * U[:, j] / rho_n - U[:, j - 1] / rho_n**2
        t = np.maximum(1.0, np.abs(z) / self.scale)
        lead = (z / (self.scale * t)) ** m
        with np.errstate(under="ignore"):
            S = lead[:, None] * U * np.exp(np.outer(np.log(rho_n), np.arange(L + 1) - L))
        return m * np.log(t) + L * np.log(rho_n), S

    def monomial_coefficients(self) -> np.ndarray:
        m, n = self.idx.low, len(self.idx)
        T = np.zeros((n, n))
        for j in range(n):
            e = np.zeros(j + 1)
            e[j] = 1.0
            p = npcheb.Chebyshev(e, domain=[self.center - self.half, self.center + self.half])
            coef = p.convert(kind=np.polynomial.Polynomial).coef
            coef = np.concatenate([coef, np.zeros(j + 1 - coef.size)])
            T[: j + 1, j] = coef * self.scale ** (-m)
        return T


def domain_scale(domain, nodes) -> float:
    """Largest coordinate modulus on the domain; monomials are scaled by it."""
    if isinstance(domain, Interval):
        return max(abs(domain.a), abs(domain.b))
    if isinstance(domain, Circle):
        return domain.radius
    if isinstance(domain, Annulus):
        return domain.r_out
    if isinstance(domain, ProductOfDisks):
        return max(domain.radii)
    return float(max(1e-300, np.abs(nodes).max()))


def make_family(idx: IncompleteIndexSet, quad: QuadratureRule, family: str = "auto"):
    nodes = quad.nodes
    scale = domain_scale(quad.domain, nodes)
    if family == "auto":
        family = "chebyshev" if isinstance(quad.domain, Interval) else "monomial"
    if family == "chebyshev":
        if idx.dim_space != 1:
            raise ValueError("the Chebyshev band family is one-dimensional")
        x = nodes[:, 0].real
        lo, hi = float(x.min()), float(x.max())
        if isinstance(quad.domain, Interval):
            lo, hi = quad.domain.a, quad.domain.b
        return ChebyshevBandFamily(idx, 0.5 * (lo + hi), 0.5 * (hi - lo), scale)
    if family == "monomial":
        return MonomialFamily(idx, scale)
    raise ValueError(f"unknown column family {family!r}")


# --- Vandermonde --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightedVandermonde:
    matrix: np.ndarray
    idx: IncompleteIndexSet
    N: int
    weight: WeightSpec
    family: object
    quad: QuadratureRule

    @property
    def scale(self) -> float:
        return self.family.scale

    def gram(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix


def gaussian_moment_oracle(k: int, N: int, log: bool = False) -> float:
    """Integral over C of |z|**(2k) exp(-2N|z|^2) dA = pi k! / (2N)**(k+1)."""
    if k < 0 or N < 1:
        raise ValueError("need k >= 0 and N >= 1")
    val = math.log(math.pi) + gammaln(k + 1) - (k + 1) * math.log(2 * N)
    return val if log else math.exp(val)


def _check_resolution(quad: QuadratureRule, N: int):
    dom, M = quad.domain, quad.M
    if isinstance(dom, Circle):
        need = 2 * N + 2
    elif isinstance(dom, Interval) or isinstance(dom, Plane):
        need = N + 1
    elif isinstance(dom, (Annulus, ProductOfDisks)):
        need = N + 2
    else:
        return
    if M < need:
        raise ResolutionError(f"{dom} rule with M={M} is too coarse for N={N}; need M >= {need}")


def assemble_vandermonde(
    quad: QuadratureRule, idx: IncompleteIndexSet, weight: WeightSpec, N: Optional[int] = None,
    family: str = "auto",
) -> WeightedVandermonde:
    """Rows: quadrature nodes; columns: the index set.

    Entry (i, j) = sqrt(q_i) * w(x_i)**N * column_j(x_i).
    """
    N = idx.N if N is None else N
    _check_resolution(quad, N)
    fam = make_family(idx, quad, family)
    ls, S = fam.log_columns(quad.nodes)
    with np.errstate(divide="ignore"):
        row_log = 0.5 * np.log(quad.weights) - N * weight.Q_points(quad.nodes) + ls
    keep = row_log > -690.0
    with np.errstate(under="ignore"):
        V = S[keep] * np.exp(row_log[keep])[:, None]
    if not np.all(np.isfinite(V)):
        raise ArithmeticError("non-finite Vandermonde entries")
    vm = WeightedVandermonde(V, idx, N, weight, fam, quad)
    if isinstance(quad.domain, Plane) and weight.kind == "gaussian" and isinstance(fam, MonomialFamily):
        _check_gaussian_moments(vm)
    return vm


def _check_gaussian_moments(vm: WeightedVandermonde):
    sq = (np.abs(vm.matrix) ** 2).sum(axis=0)
    for j, alpha in enumerate(vm.idx):
        k = alpha[0]
        got = math.log(sq[j]) + 2 * k * math.log(vm.scale)
        want = gaussian_moment_oracle(k, vm.N, log=True)
        if abs(math.expm1(got - want)) > MOMENT_RTOL:
            raise ResolutionError(
                f"plane quadrature misses the Gaussian moment k={k} "
                f"(relative error {abs(math.expm1(got - want)):.2e}); raise M or the radius"
            )


# --- orthonormal bases --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """B = columns @ coef; coef is upper triangular when built by QR."""

    idx: IncompleteIndexSet
    family: object
    coef: np.ndarray
    N: int
    theta: Theta
    weight: WeightSpec
    measure: str
    kappa: float
    global_weight: bool = False

    def __len__(self):
        return self.coef.shape[1]

    def log_abs_values(self, pts) -> np.ndarray:
        """log|B_k(z)|, shape (n_points, dim)."""
        ls, S = self.family.log_columns(pts)
        with np.errstate(divide="ignore"):
            return ls[:, None] + np.log(np.abs(S @ self.coef))

    def values(self, pts) -> np.ndarray:
        ls, S = self.family.log_columns(pts)
        return np.exp(ls)[:, None] * (S @ self.coef)

    def log_bergman(self, pts) -> np.ndarray:
        """log K_N(z, z); includes exp(-2N phi) for global weights."""
        pts = as_points(pts, self.idx.dim_space)
        ls, S = self.family.log_columns(pts)
        with np.errstate(divide="ignore"):
            out = 2 * ls + np.log((np.abs(S @ self.coef) ** 2).sum(axis=1))
        if self.global_weight:
            out = out - 2 * self.N * self.weight.Q_points(pts)
        return out

    def polynomials(self):
        """The basis as monomial-coefficient polynomials (export only)."""
        C = self.family.monomial_coefficients() @ self.coef
        out = []
        for k in range(C.shape[1]):
            out.append(MultiPolynomial(self.idx.dim_space, dict(zip(self.idx.indices, C[:, k]))))
        return out

    def discrete_gram(self, vm: WeightedVandermonde) -> np.ndarray:
        Q = vm.matrix @ self.coef
        return Q.conj().T @ Q

    def remixed(self, U: np.ndarray) -> "OrthoBasis":
        return replace(self, coef=self.coef @ U)


def orthonormalize(
    vm: WeightedVandermonde, reorth_kappa: float = REORTH_KAPPA, rank_tol: float = RANK_TOL
) -> OrthoBasis:
    """Householder QR of the column-equilibrated Vandermonde; coef = D R^{-1}."""
    V = vm.matrix
    norms = np.linalg.norm(V, axis=0)
    if np.any(norms == 0):
        j = int(np.argmin(norms))
        raise RankDeficiencyError(vm.idx[j], 0.0)
    rows, cols = V.shape
    if rows < cols:
        # fewer nodes than columns: column `rows` is the first that cannot be independent
        raise RankDeficiencyError(vm.idx[rows], 0.0)
    D = 1.0 / norms
    Q, R = np.linalg.qr(V * D)
    diag = np.abs(np.diag(R))
    ratio = diag / diag.max()
    bad = np.nonzero(ratio <= rank_tol)[0]
    if bad.size:
        raise RankDeficiencyError(vm.idx[int(bad[0])], float(ratio[bad[0]]))
    kappa = float(np.linalg.cond(R))
    if kappa > reorth_kappa:
        Q2, R2 = np.linalg.qr(Q)
        R = R2 @ R
    Rinv = np.linalg.solve(R, np.eye(R.shape[0], dtype=R.dtype))
    Rinv = np.triu(Rinv)
    coef = D[:, None] * Rinv
    quad = vm.quad
    return OrthoBasis(
        vm.idx,
        vm.family,
        coef,
        vm.N,
        vm.idx.theta,
        vm.weight,
        f"{quad.domain}|{quad.measure}|M={quad.M}",
        kappa,
        global_weight=isinstance(quad.domain, Plane),
    )


def build_basis(quad: QuadratureRule, N: int, theta, weight: WeightSpec, family: str = "auto") -> OrthoBasis:
    d = quad.nodes.shape[1]
    idx = enumerate_index_set(N, Theta.parse(theta), d)
    return orthonormalize(assemble_vandermonde(quad, idx, weight, N, family))


def gaussian_exact_basis(N: int, theta) -> OrthoBasis:
    """Orthonormal basis for exp(-2N|z|^2) dA on C from the closed-form moments.

    The monomials are already orthogonal there, so B_k = z**k / sqrt(moment_k).
    """
    theta = Theta.parse(theta)
    idx = enumerate_index_set(N, theta, 1)
    logm = np.array([gaussian_moment_oracle(a[0], N, log=True) for a in idx])
    coef = np.diag(np.exp(-0.5 * logm))
    return OrthoBasis(
        idx, MonomialFamily(idx, 1.0), coef, N, theta, gaussian_weight(), "plane|area|exact-moments", 1.0,
        global_weight=True,
    )


# --- Bergman diagonals --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BergmanDiagonal:
    points: np.ndarray
    log_values: np.ndarray
    variant: str

    @property
    def values(self) -> np.ndarray:
        with np.errstate(under="ignore", over="ignore"):
            return np.exp(self.log_values)


def bergman_diag(basis: OrthoBasis, points) -> BergmanDiagonal:
    pts = as_points(points, basis.idx.dim_space)
    variant = "global-weighted" if basis.global_weight else "compact"
    return BergmanDiagonal(pts, basis.log_bergman(pts), variant)


def bm_constant(mesh, basis: OrthoBasis, weight: Optional[WeightSpec] = None, N: Optional[int] = None) -> float:
    """max over the mesh of w**N sqrt(K_N): the best constant in
    ||w^N P||_K <= M_N ||w^N P||_{L2(mu)} over the span of the basis."""
    pts = as_points(getattr(mesh, "points", mesh), basis.idx.dim_space)
    logk = basis.log_bergman(pts)
    N = basis.N if N is None else N
    if weight is not None and not basis.global_weight:
        logk = logk - 2 * N * weight.Q_points(pts)
    return float(np.exp(0.5 * logk.max()))


def scaled_density(basis: OrthoBasis, points) -> np.ndarray:
    """K_N / d(N, theta) for a globally weighted basis."""
    if not basis.global_weight:
        raise ValueError("scaled density needs a globally weighted basis")
    dN = dim(basis.N, basis.theta, basis.idx.dim_space)
    with np.errstate(under="ignore"):
        return np.exp(basis.log_bergman(points) - math.log(dN))


def basis_to_text(basis: OrthoBasis) -> str:
    head = (
        f"# basis kappa={basis.kappa:.17g} N={basis.N} theta={basis.theta} "
        f"weight={basis.weight} measure={basis.measure} count={len(basis)}\n"
    )
    blocks = [head]
    for k, P in enumerate(basis.polynomials()):
        blocks.append(f"# B {k}\n")
        blocks.append(dumps(P, basis.N, basis.theta))
    return "".join(blocks)

