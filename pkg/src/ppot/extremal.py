"""Extremal functions: closed forms, Bergman and basis approximations, the
sup-norm extremal value by linear programming, and the reports that compare
them (hull, theta-monotonicity, convergence, Monge-Ampere mass, density).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from .geometry_measure import (
    Circle,
    Interval,
    Mesh,
    WeightSpec,
    build_mesh,
    build_quadrature,
    composite_gauss_legendre,
    gaussian_weight,
    unit_weight,
)
from .index_core import Theta, dim, enumerate_index_set
from .ortho_bergman import (
    RANK_TOL,
    ChebyshevBandFamily,
    OrthoBasis,
    RankDeficiencyError,
    bm_constant,
    build_basis,
    gaussian_exact_basis,
    scaled_density,
)
from .poly_core import MultiPolynomial, as_points, log_abs
from .reports import Report
from .simplex import UnboundedError, perturbed_rhs
from .simplex import solve_standard as simplex_min

NEG_INF = -math.inf
DEFAULT_SLACK = 0.02
LP_FEAS_TOL = 1e-9
MASS_RTOL = 0.02
REFINE_RTOL = 1e-3
LP_PERTURB = 1e-8


def _radii(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim <= 1:
        return np.abs(z).astype(float).reshape(-1)
    return np.sqrt((np.abs(z) ** 2).sum(axis=1))


def _theta_float(theta) -> float:
    return float(Theta.parse(theta))


# --- closed forms -------------------------------------------------------------

OUTER_CONST = 0.5 - 0.5 * math.log(0.5)


def closed_form_V_gaussian(theta, z, d: int = 1) -> np.ndarray:
    """Extremal function for phi = |z|^2 (radial, any dimension).

    theta log r + theta/2 - (theta/2) log(theta/2) inside sqrt(theta/2),
    r^2 up to 1/sqrt(2), log r + 1/2 - (1/2) log(1/2) outside.
    """
    th = _theta_float(theta)
    r = _radii(z) if d == 1 else np.sqrt((np.abs(np.atleast_2d(np.asarray(z, dtype=complex))) ** 2).sum(axis=1))
    out = np.empty_like(r)
    outer = r >= 1 / math.sqrt(2)
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    if th == 1.0:
        return logr + OUTER_CONST
    out[outer] = logr[outer] + OUTER_CONST
    inner_edge = math.sqrt(th / 2)
    inner = r < inner_edge
    mid = ~outer & ~inner
    out[mid] = r[mid] ** 2
    if th > 0:
        out[inner] = th * logr[inner] + th / 2 - (th / 2) * math.log(th / 2)
    return out


def closed_form_V_circle(theta, z) -> np.ndarray:
    """max(theta log|z|, log|z|) for the unit circle with w = 1."""
    th = _theta_float(theta)
    r = _radii(z)
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    inner = np.where(r > 0, th * logr, NEG_INF if th > 0 else 0.0)
    return np.maximum(inner, logr)


def closed_form_V_interval(z) -> np.ndarray:
    """Green function of C minus [-1, 1]: log|z + sqrt(z^2 - 1)|."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    w = z + np.sqrt(z - 1) * np.sqrt(z + 1)
    return np.log(np.maximum(np.abs(w), 1 / np.abs(w)))


# --- grids --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtremalGrid:
    points: np.ndarray
    values: np.ndarray
    method: str
    N: Optional[int]
    theta: Theta
    weight: str = "unit"

    def rows(self):
        for z, v in zip(self.points, self.values):
            row = []
            for c in np.atleast_1d(z):
                row += [float(c.real), float(c.imag)]
            yield row + [float(v), self.method, "" if self.N is None else self.N, str(self.theta)]

    def header(self) -> List[str]:
        d = np.atleast_2d(self.points).shape[1]
        cols = []
        for j in range(1, d + 1):
            s = "" if d == 1 else str(j)
            cols += [f"x{s}_re", f"x{s}_im"]
        return cols + ["value", "method", "N", "theta"]


def closed_form_grid(kind: str, theta, points) -> ExtremalGrid:
    pts = as_points(points)
    if kind == "gaussian":
        vals = closed_form_V_gaussian(theta, pts[:, 0])
        return ExtremalGrid(pts, vals, "closed-form", None, Theta.parse(theta), "gaussian")
    vals = closed_form_V_circle(theta, pts[:, 0])
    return ExtremalGrid(pts, vals, "closed-form", None, Theta.parse(theta))


def approx_V_bergman(basis: OrthoBasis, points) -> ExtremalGrid:
    """(1 / 2N) log K_N(z, z); -inf where every basis element vanishes."""
    pts = as_points(points, basis.idx.dim_space)
    vals = basis.log_bergman(pts) / (2 * basis.N)
    return ExtremalGrid(pts, vals, "bergman", basis.N, basis.theta, str(basis.weight))


def approx_V_sup_basis(basis: OrthoBasis, points, weight=None, N: Optional[int] = None) -> ExtremalGrid:
    """max_k (1/N) log|B_k(z)| for a basis orthonormal w.r.t. w^{2N} mu."""
    pts = as_points(points, basis.idx.dim_space)
    N = basis.N if N is None else N
    vals = basis.log_abs_values(pts).max(axis=1) / N
    return ExtremalGrid(pts, vals, "sup-basis", N, basis.theta, str(basis.weight))


# --- sup-norm extremal value by LP --------------------------------------------


@dataclass(frozen=True, eq=False)
class PhiLP:
    """Optimum of max Re P(z) over |w^N P| <= 1 on the mesh, P in pi_{N,theta}."""

    value: float
    z: float
    N: int
    theta: Theta
    family: ChebyshevBandFamily
    coef: np.ndarray
    mesh_points: np.ndarray
    mesh_values: np.ndarray
    iterations: int

    def polynomial(self) -> MultiPolynomial:
        c = self.family.monomial_coefficients() @ self.coef
        return MultiPolynomial(1, dict(zip(self.family.idx.indices, c)))

    def __float__(self):
        return self.value


def _real_mesh(mesh) -> np.ndarray:
    pts = as_points(getattr(mesh, "points", mesh), 1)[:, 0]
    if np.any(np.abs(pts.imag) > 1e-14):
        raise ValueError("phi_lp needs a mesh on the real line")
    x = np.unique(pts.real)
    if x.size == 0:
        raise ValueError("empty mesh")
    return x


def phi_lp_solve(mesh, theta, N: int, z, weight: Optional[WeightSpec] = None) -> PhiLP:
    """Solve the extremal problem for real z by the dense simplex.

    Variables are coefficients in the band-adapted Chebyshev family of the
    mesh hull (split into positive and negative parts); each mesh point x_i
    gives -w(x_i)^{-N} <= P(x_i) <= w(x_i)^{-N}.
    """
    theta = Theta.parse(theta)
    zc = complex(z)
    if abs(zc.imag) > 0:
        raise ValueError("phi_lp handles real z only; bracket complex z by the Bergman sandwich")
    x = _real_mesh(mesh)
    idx = enumerate_index_set(N, theta, 1)
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    fam = ChebyshevBandFamily(idx, 0.5 * (lo + hi), 0.5 * (hi - lo), max(1.0, float(np.abs(x).max())))
    ls_x, A = fam.log_columns(x.astype(complex))
    A = (A * np.exp(ls_x)[:, None]).real
    if weight is not None:
        A = A * weight.w(np.abs(x))[:, None] ** N
    ls_z, g = fam.log_columns(np.array([zc]))
    g = g[0].real
    if not np.any(g):
        # every element of the band vanishes at z (z = 0 with theta > 0)
        return PhiLP(0.0, zc.real, N, theta, fam, np.zeros(len(idx)), x, np.zeros_like(x), 0)
    colmax = np.abs(A).max(axis=0)
    colmax[colmax == 0] = 1.0
    A = A / colmax
    gscale = np.abs(g / colmax).max()
    c = g / colmax / gscale
    n, M = len(idx), x.size
    if M < n:
        raise UnboundedError(f"{M} mesh points cannot bound {n} coefficients")
    # dual: min sum(lam+ + lam-) s.t. A^T (lam+ - lam-) = c; its multipliers are P's coefficients
    # z inside the mesh hull makes this heavily degenerate; the perturbation
    # keeps the pivots moving and is removed again inside the solver
    Aeq = np.hstack([A.T, -A.T])
    start = _interpolation_basis(A, perturbed_rhs(c, LP_PERTURB), idx.indices)
    sol = simplex_min(np.ones(2 * M), Aeq, c, start, perturb=LP_PERTURB)
    y = sol.duals
    coef = y / colmax
    value = float(np.exp(ls_z[0]) * gscale * sol.value)
    return PhiLP(value, zc.real, N, theta, fam, coef, x, A @ y, sol.iterations)


def _interpolation_basis(A: np.ndarray, c: np.ndarray, alphas=None):
    """Starting vertex of the dual: interpolate c at n mesh points chosen by
    column-pivoted QR of A^T (a well-conditioned square subsystem)."""
    M, n = A.shape
    _, R, perm = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    ratio = abs(R[n - 1, n - 1]) / abs(R[0, 0])
    if ratio < RANK_TOL:
        raise RankDeficiencyError(alphas[-1] if alphas else n - 1, ratio)
    rows = np.sort(perm[:n])
    lam = np.linalg.solve(A[rows].T, c)
    return np.where(lam >= 0, rows, rows + M)


def phi_lp(mesh, theta, N: int, z, weight: Optional[WeightSpec] = None) -> float:
    return phi_lp_solve(mesh, theta, N, z, weight).value


def lobatto_size_for(N_list: Sequence[int], minimum: int = 121) -> int:
    """Chebyshev-Lobatto mesh size whose nodes contain the extrema of every T_N."""
    step = math.lcm(*[max(1, int(n)) for n in N_list])
    k = max(1, math.ceil((minimum - 1) / step))
    return k * step + 1


def phi_lp_refined(domain: Interval, theta, N: int, z, M: int, weight=None, rtol: float = REFINE_RTOL):
    """Solve on meshes of size M and 2M - 1 (nested); report the relative change."""
    coarse = phi_lp(build_mesh(domain, M), theta, N, z, weight)
    fine = phi_lp(build_mesh(domain, 2 * M - 1), theta, N, z, weight)
    change = abs(fine - coarse) / max(abs(fine), 1e-300)
    return fine, coarse, change, change < rtol


# --- hull, monotonicity, convergence ------------------------------------------


def hull_membership(V, z, tol: float = 0.0) -> bool:
    """True iff V(z) <= tol; V is a callable or an ExtremalGrid holding z."""
    if isinstance(V, ExtremalGrid):
        pts = np.atleast_2d(V.points)
        zz = as_points(z, pts.shape[1])[0]
        dist = np.abs(pts - zz).max(axis=1)
        i = int(np.argmin(dist))
        if dist[i] > 1e-12:
            raise ValueError(f"point {z} is not on the grid")
        val = V.values[i]
    else:
        val = np.asarray(V(np.array([complex(z)]))).reshape(-1)[0]
    return bool(val <= tol)


def monotonicity_report(theta_list, grids: Sequence[ExtremalGrid], slack: float = DEFAULT_SLACK) -> Report:
    """Check V_{theta1} <= V_{theta2} + slack pointwise whenever theta1 > theta2."""
    thetas = [Theta.parse(t) for t in theta_list]
    if len(thetas) != len(grids):
        raise ValueError("one grid per theta is required")
    for g in grids[1:]:
        if g.points.shape != grids[0].points.shape or not np.allclose(g.points, grids[0].points):
            raise ValueError("grids must share their points")
    rows = []
    worst = 0.0
    n_viol = 0
    for i, (t1, g1) in enumerate(zip(thetas, grids)):
        for t2, g2 in zip(thetas, grids):
            if not t1.fraction > t2.fraction:
                continue
            with np.errstate(invalid="ignore"):
                excess = g1.values - g2.values
            excess = np.where(np.isnan(excess), 0.0, excess)
            k = int(np.argmax(excess))
            viol = int(np.sum(excess > slack))
            n_viol += viol
            worst = max(worst, float(excess[k]))
            rows.append(
                {
                    "theta_hi": str(t1),
                    "theta_lo": str(t2),
                    "max_excess": float(excess[k]),
                    "at": complex(np.atleast_1d(g1.points[k])[0]),
                    "violations": viol,
                }
            )
    return Report(
        "monotonicity",
        {"thetas": [str(t) for t in thetas], "slack": slack, "method": grids[0].method if grids else ""},
        rows,
        "pass" if n_viol == 0 else "fail",
    )


def uniform_convergence_report(
    K,
    theta,
    E_points,
    N_list: Sequence[int],
    V_oracle: Callable,
    M: Optional[int] = None,
    slack: float = 0.1,
    hull_margin: float = 0.1,
) -> Report:
    """sup over E of |V - (1/N) log Phi_N| for each N.

    Interval K: Phi_N from the LP on a Chebyshev-Lobatto mesh. Other K: the
    Bergman estimate (1/2N) log K_N, reported with the sandwich band
    [(1/2N) log(K/(d M_N^2)), (1/2N) log(K d)].
    """
    theta = Theta.parse(theta)
    E = as_points(E_points, 1)[:, 0]
    V = np.asarray(V_oracle(E), dtype=float).reshape(-1)
    inside = [complex(e) for e, v in zip(E, V) if hull_membership(lambda _z, v=v: v, e, hull_margin)]
    if inside:
        raise ValueError(f"evaluation set meets the theta-hull (V <= {hull_margin}) at {inside[0]}")
    rows = []
    for N in N_list:
        if isinstance(K, Interval):
            m = M or lobatto_size_for(N_list)
            mesh = build_mesh(K, m)
            est = np.array([math.log(phi_lp(mesh, theta, N, e.real)) / N for e in E])
            lo = hi = est
        else:
            basis = build_basis(build_quadrature(K, M or (2 * N + 2)), N, theta, unit_weight())
            logk = basis.log_bergman(E)
            est = logk / (2 * N)
            dN = len(basis)
            mesh = build_mesh(K, max(4 * N + 4, 64))
            MN = bm_constant(mesh, basis)
            lo = (logk - math.log(dN) - 2 * math.log(MN)) / (2 * N)
            hi = (logk + math.log(dN)) / (2 * N)
        err = np.abs(V - est)
        k = int(np.argmax(err))
        rows.append(
            {
                "N": int(N),
                "sup_error": float(err[k]),
                "at": complex(E[k]),
                "estimate": float(est[k]),
                "oracle": float(V[k]),
                "band_lo": float(np.asarray(lo)[k]),
                "band_hi": float(np.asarray(hi)[k]),
            }
        )
    errs = [r["sup_error"] for r in rows]
    ok = all(b <= a * (1 + slack) for a, b in zip(errs, errs[1:]))
    return Report(
        "uniform_convergence",
        {"K": str(K), "theta": str(theta), "N_list": list(N_list), "slack": slack},
        rows,
        "pass" if ok else "fail",
    )


# --- weighted sup norms on the contact set --------------------------------------


def gaussian_contact_radii(theta) -> tuple:
    """Inner and outer radius of the contact annulus for phi = |z|^2."""
    th = _theta_float(theta)
    return math.sqrt(th / 2), 1 / math.sqrt(2)


def polar_points(r_lo: float, r_hi: float, n_r: int, n_ang: int) -> np.ndarray:
    r = np.linspace(r_lo, r_hi, n_r)
    ang = 2 * np.pi * np.arange(n_ang) / n_ang
    return (r[:, None] * np.exp(1j * ang)[None, :]).reshape(-1, 1)


def weighted_supnorm_equivalence(
    P: MultiPolynomial, weight: WeightSpec, D_mesh, global_mesh, N: int, slack: float = 1e-2
) -> Report:
    """Compare sup w^N |P| over the contact set with the sup over the plane."""
    D = as_points(getattr(D_mesh, "points", D_mesh), P.d)
    G = as_points(getattr(global_mesh, "points", global_mesh), P.d)
    lD = log_abs(P, D) - N * weight.Q_points(D)
    lG = log_abs(P, G) - N * weight.Q_points(G)
    ratio = float(np.exp(lG.max() - lD.max()))
    row = {
        "sup_D": float(np.exp(lD.max())),
        "sup_global": float(np.exp(lG.max())),
        "ratio": ratio,
        "argmax_global": complex(G[int(np.argmax(lG)), 0]),
    }
    return Report(
        "weighted_supnorm_equivalence",
        {"N": N, "weight": str(weight), "slack": slack, "n_D": len(D), "n_global": len(G)},
        [row],
        "pass" if ratio <= 1 + slack else "fail",
    )


# --- Monge-Ampere masses in d = 1 ---------------------------------------------


@dataclass
class MassReport:
    radii: np.ndarray
    cumulative: np.ndarray
    origin_mass: float
    annulus_mass: float
    total: float

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.cumulative) >= -1e-9 * max(1.0, abs(self.total))))


MIN_BRANCH_POINTS = 8


def radial_ma_mass(r, u, theta=None, kinks: Sequence[float] = ()) -> MassReport:
    """Riesz masses of a radial subharmonic profile u(r) in the plane.

    mu(B_r) = 2 pi r u'(r) = 2 pi du/dlog r, differentiated in log r branch by
    branch between the kink radii (one-sided at the kinks); the origin mass is 2 pi times the slope
    of u against log r on the innermost decade of the grid.
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    order = np.argsort(r)
    r, u = r[order], u[order]
    if r[0] <= 0:
        raise ValueError("radial grid must avoid the origin")
    cuts = sorted(k for k in kinks if r[0] < k < r[-1])
    branch = np.searchsorted(cuts, r, side="right")
    s = np.log(r)
    du = np.empty_like(r)
    for k in range(len(cuts) + 1):
        sel = branch == k
        n = int(sel.sum())
        if n < MIN_BRANCH_POINTS:
            raise ValueError(f"grid too coarse: {n} points on branch {k} (need {MIN_BRANCH_POINTS})")
        du[sel] = np.gradient(u[sel], s[sel], edge_order=2)
    cumulative = 2 * np.pi * du
    inner = r <= 10 * r[0]
    if inner.sum() < 2:
        raise ValueError("grid too coarse near the origin")
    slope = np.polyfit(np.log(r[inner]), u[inner], 1)[0]
    origin = 2 * np.pi * float(slope)
    total = float(cumulative[-1])
    return MassReport(r, cumulative, origin, total - origin, total)


def gaussian_mass_grid(theta, r_min: float = 1e-6, r_max: float = 3.0, per_branch: int = 64) -> np.ndarray:
    """Radial grid with per_branch points on each branch of the Gaussian closed form,
    strictly between the kinks."""
    a, b = gaussian_contact_radii(theta)
    pieces = []
    if a > 0:
        pieces.append(np.geomspace(r_min, a, per_branch + 1, endpoint=False)[:])
        pieces.append(np.linspace(a, b, per_branch + 2)[1:-1])
    else:
        pieces.append(np.geomspace(r_min, b, per_branch + 1, endpoint=False))
    pieces.append(np.linspace(b, r_max, per_branch + 1)[1:])
    return np.concatenate(pieces)


def gaussian_mass_report(theta, **grid_kw) -> MassReport:
    r = gaussian_mass_grid(theta, **grid_kw)
    u = closed_form_V_gaussian(theta, r)
    return radial_ma_mass(r, u, theta, kinks=[k for k in gaussian_contact_radii(theta) if k > 0])


# --- Bergman density limits ---------------------------------------------------


def density_limit(weight: WeightSpec, theta, points) -> np.ndarray:
    """Limit of K_N / d(N, theta) for phi = |z|^2 in d = 1:
    (2/pi) / (1 - theta) on the contact annulus, zero elsewhere."""
    if weight.kind != "gaussian":
        raise ValueError(f"density limit is implemented for the Gaussian weight only, not {weight}")
    th = _theta_float(theta)
    if th >= 1:
        raise ValueError("density limit needs theta < 1")
    a, b = gaussian_contact_radii(theta)
    r = _radii(as_points(points, 1)[:, 0])
    det_ddc = 4.0
    level = det_ddc / (2 * np.pi) / (1 - th)
    return np.where((r >= a) & (r <= b), level, 0.0)


def density_radial_rule(theta, N: int, R: float = 3.0, nodes: int = 20):
    """Composite Gauss-Legendre on [0, R] with breaks at the contact radii and
    panels no wider than 1/(4 sqrt(N))."""
    a, b = gaussian_contact_radii(theta)
    h = min(0.05, 0.25 / math.sqrt(N))
    breaks = sorted({0.0, a, b, R})
    fine = [breaks[0]]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        k = max(1, math.ceil((hi - lo) / h))
        fine += list(np.linspace(lo, hi, k + 1)[1:])
    return composite_gauss_legendre(np.array(fine), nodes)


def l1_density_report(
    theta,
    N_list: Sequence[int],
    R: float = 3.0,
    local_radius: float = 2.0,
    local_bound: Optional[float] = None,
) -> Report:
    """L1 distance between K_N / d(N, theta) and its limit, exact-moment path."""
    theta = Theta.parse(theta)
    gw = gaussian_weight()
    rows = []
    r_local = np.linspace(0.0, local_radius, 2001)
    for N in N_list:
        basis = gaussian_exact_basis(N, theta)
        r, wr = density_radial_rule(theta, N, R)
        f = scaled_density(basis, r)
        g = density_limit(gw, theta, r)
        area = 2 * np.pi * r * wr
        rows.append(
            {
                "N": int(N),
                "dim": dim(N, theta),
                "l1_distance": float(np.sum(area * np.abs(f - g))),
                "normalization": float(np.sum(area * f)),
                "local_max": float(scaled_density(basis, r_local).max()),
            }
        )
    l1 = [row["l1_distance"] for row in rows]
    checks = {
        "decreasing": all(b < a for a, b in zip(l1, l1[1:])),
        "normalized": all(abs(row["normalization"] - 1) <= 1e-6 for row in rows),
    }
    if local_bound is not None:
        checks["local_bound"] = all(row["local_max"] <= local_bound for row in rows)
    return Report(
        "l1_density",
        {"theta": str(theta), "N_list": list(N_list), "R": R, "local_radius": local_radius,
         "local_bound": local_bound, "checks": checks},
        rows,
        "pass" if all(checks.values()) else "fail",
    )
