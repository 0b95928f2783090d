"""Model domains, meshes, quadrature rules and admissible weights."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import radial_expr

# --- domains ------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    a: float = -1.0
    b: float = 1.0
    d = 1
    bounded = True

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got [{self.a}, {self.b}]")

    def measure(self) -> float:
        return self.b - self.a

    def contains(self, pts, tol=1e-12) -> np.ndarray:
        z = pts[:, 0]
        return (np.abs(z.imag) <= tol) & (z.real >= self.a - tol) & (z.real <= self.b + tol)

    def __str__(self):
        return f"interval {self.a!r} {self.b!r}"


@dataclass(frozen=True)
class Circle:
    radius: float = 1.0
    d = 1
    bounded = True

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")

    def measure(self) -> float:
        return 2 * math.pi * self.radius

    def contains(self, pts, tol=1e-12) -> np.ndarray:
        return np.abs(np.abs(pts[:, 0]) - self.radius) <= tol * max(1.0, self.radius)

    def __str__(self):
        return f"circle {self.radius!r}"


@dataclass(frozen=True)
class Annulus:
    r_in: float
    r_out: float
    d = 1
    bounded = True

    def __post_init__(self):
        if not 0 <= self.r_in < self.r_out:
            raise ValueError(f"annulus needs 0 <= r_in < r_out, got {self.r_in}, {self.r_out}")

    def measure(self) -> float:
        return math.pi * (self.r_out**2 - self.r_in**2)

    def contains(self, pts, tol=1e-12) -> np.ndarray:
        r = np.abs(pts[:, 0])
        return (r >= self.r_in - tol) & (r <= self.r_out + tol)

    def __str__(self):
        return f"annulus {self.r_in!r} {self.r_out!r}"


@dataclass(frozen=True)
class Disk(Annulus):
    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "r_in", 0.0)
        object.__setattr__(self, "r_out", float(radius))

    @property
    def radius(self) -> float:
        return self.r_out

    def __str__(self):
        return f"disk {self.r_out!r}"


@dataclass(frozen=True)
class Plane(Disk):
    """All of C, truncated at ``radius`` for meshing and quadrature."""

    bounded = False

    def __init__(self, radius: float = 4.0):
        super().__init__(radius)

    def __str__(self):
        return "plane"


@dataclass(frozen=True)
class ProductOfDisks:
    radii: Tuple[float, float] = (1.0, 1.0)
    d = 2
    bounded = True

    def __post_init__(self):
        if len(self.radii) != 2 or min(self.radii) <= 0:
            raise ValueError("product of disks needs two positive radii")

    def measure(self) -> float:
        return math.pi**2 * self.radii[0] ** 2 * self.radii[1] ** 2

    def contains(self, pts, tol=1e-12) -> np.ndarray:
        return (np.abs(pts[:, 0]) <= self.radii[0] + tol) & (np.abs(pts[:, 1]) <= self.radii[1] + tol)

    def __str__(self):
        return f"bidisk {self.radii[0]!r} {self.radii[1]!r}"


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    bounded = True

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if pts.shape[0] == 0 or pts.size == 0:
            raise ValueError("point cloud must be nonempty")
        object.__setattr__(self, "points", pts)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def measure(self) -> float:
        return 1.0

    def contains(self, pts, tol=1e-12) -> np.ndarray:
        dist = np.abs(pts[:, None, :] - self.points[None, :, :]).max(axis=2)
        return dist.min(axis=1) <= tol

    def __str__(self):
        return "points " + " ".join(repr(complex(p)) for p in self.points[:, 0])


def parse_domain(text: str):
    """Parse ``interval a b``, ``circle R``, ``disk R``, ``annulus r1 r2``,
    ``bidisk r1 r2``, ``points z1 z2 ...`` or ``plane [R]``."""
    parts = text.split()
    if not parts:
        raise ValueError("empty domain specification")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "interval":
            return Interval(float(args[0]), float(args[1]))
        if kind == "circle":
            return Circle(float(args[0]) if args else 1.0)
        if kind == "disk":
            return Disk(float(args[0]) if args else 1.0)
        if kind == "annulus":
            return Annulus(float(args[0]), float(args[1]))
        if kind == "bidisk":
            return ProductOfDisks((float(args[0]), float(args[1])))
        if kind == "points":
            return PointCloud(np.array([complex(a) for a in args]).reshape(-1, 1))
        if kind == "plane":
            return Plane(float(args[0]) if args else 4.0)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad domain specification {text!r}: {exc}") from exc
    raise ValueError(f"unknown domain kind {kind!r}")


# --- weights ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """w = exp(-Q) with Q a function of |z| (Euclidean norm).

    ``kind`` is one of ``unit``, ``gaussian``, ``radial``, ``tabulated``.
    """

    kind: str
    Q: Callable[[np.ndarray], np.ndarray]
    label: str
    eps: float = 0.0
    laplacian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    expr: object = None

    def Q_points(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=complex))
        r = np.sqrt((np.abs(pts) ** 2).sum(axis=1))
        return np.asarray(self.Q(r), dtype=float) * np.ones_like(r)

    def w(self, r) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(-np.asarray(self.Q(np.asarray(r, dtype=float)), dtype=float))

    def positive_region(self, r) -> np.ndarray:
        """Where dd^c Q exists and is positive (d = 1 radial Laplacian)."""
        if self.laplacian is None:
            return np.zeros_like(np.asarray(r, dtype=float), dtype=bool)
        return np.asarray(self.laplacian(np.asarray(r, dtype=float))) > 0

    @property
    def is_unit(self) -> bool:
        return self.kind == "unit"

    def __str__(self):
        return self.label


def unit_weight() -> WeightSpec:
    return WeightSpec("unit", lambda r: np.zeros_like(np.asarray(r, dtype=float)), "unit")


def gaussian_weight() -> WeightSpec:
    """phi(z) = |z|^2; grows faster than (1 + eps) log|z| for every eps."""
    return WeightSpec(
        "gaussian",
        lambda r: np.asarray(r, dtype=float) ** 2,
        "gaussian",
        eps=1.0,
        laplacian=lambda r: np.full_like(np.asarray(r, dtype=float), 4.0),
    )


def radial_weight(text: str, eps: float = 0.0) -> WeightSpec:
    node = radial_expr.parse_radial_expression(text)

    def Q(r):
        return radial_expr.evaluate(node, r)

    def lap(r):
        r = np.asarray(r, dtype=float)
        d1, d2 = radial_expr.derivatives(node, r)
        return d2 + d1 / r

    return WeightSpec("radial", Q, f"radial: {text}", eps=eps, laplacian=lap, expr=node)


def tabulated_weight(rs: Sequence[float], qs: Sequence[float]) -> WeightSpec:
    """Piecewise-linear Q through (r, Q) samples; constant beyond the table."""
    rs = np.asarray(rs, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if rs.ndim != 1 or rs.shape != qs.shape or rs.size < 2 or np.any(np.diff(rs) <= 0):
        raise ValueError("tabulated weight needs >= 2 samples with increasing radii")
    label = "tabulated: " + ", ".join(f"{a:.17g}:{b:.17g}" for a, b in zip(rs, qs))
    return WeightSpec("tabulated", lambda r: np.interp(r, rs, qs), label)


def parse_weight(text: str) -> WeightSpec:
    """``unit``, ``gaussian``, ``radial: <expr>`` or ``tabulated: r:q, r:q, ...``."""
    s = text.strip()
    head, _, rest = s.partition(":")
    head = head.strip().lower()
    if head in ("unit", "1", "none") and not rest:
        return unit_weight()
    if head in ("gaussian", "gauss") and not rest:
        return gaussian_weight()
    if head == "radial":
        return radial_weight(rest.strip())
    if head == "tabulated":
        pairs = [p.split(":") for p in rest.replace(";", ",").split(",") if p.strip()]
        try:
            rs, qs = zip(*[(float(a), float(b)) for a, b in pairs])
        except ValueError as exc:
            raise ValueError(f"bad tabulated weight {text!r}") from exc
        return tabulated_weight(rs, qs)
    raise ValueError(f"unknown weight specification {text!r}")


# --- meshes -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Mesh:
    domain: object
    points: np.ndarray
    M: int

    def __len__(self):
        return self.points.shape[0]

    def to_bytes(self) -> bytes:
        return np.ascontiguousarray(self.points).tobytes()


def chebyshev_lobatto(a: float, b: float, M: int) -> np.ndarray:
    """M Chebyshev extreme points on [a, b], endpoints included, ascending."""
    x = -np.cos(np.pi * np.arange(M) / (M - 1))
    x[0], x[-1] = -1.0, 1.0
    if M % 2 == 1:
        x[M // 2] = 0.0
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def _polar(radii, n_ang):
    ang = 2 * np.pi * np.arange(n_ang) / n_ang
    return (radii[:, None] * np.exp(1j * ang)[None, :]).ravel()


def build_mesh(domain, M: int, exclude_origin: float = 0.0) -> Mesh:
    """Deterministic point set discretizing the domain.

    ``exclude_origin`` drops points with |z| below that radius.
    """
    if M < 2:
        raise ValueError(f"mesh resolution M must be >= 2, got {M}")
    if isinstance(domain, Interval):
        pts = chebyshev_lobatto(domain.a, domain.b, M).astype(complex)[:, None]
    elif isinstance(domain, Circle):
        pts = _polar(np.array([domain.radius]), M)[:, None]
    elif isinstance(domain, Annulus):
        lo = max(domain.r_in, exclude_origin)
        radii = np.linspace(lo, domain.r_out, M)
        pts = _polar(radii, 2 * M)[:, None]
        if lo == 0.0:
            pts = np.concatenate([np.zeros((1, 1), complex), pts[2 * M:]])
    elif isinstance(domain, ProductOfDisks):
        # per factor: origin plus (M-1) rings of M angles, so at most M**2 points
        factors = []
        for R in domain.radii:
            ring = _polar(np.linspace(0, R, M)[1:], M)
            factors.append(np.concatenate([[0j], ring]))
        pts = np.stack(
            [np.repeat(factors[0], factors[1].size), np.tile(factors[1], factors[0].size)], axis=1
        )
    elif isinstance(domain, PointCloud):
        pts = domain.points.copy()
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    if exclude_origin > 0:
        keep = np.sqrt((np.abs(pts) ** 2).sum(axis=1)) >= exclude_origin
        pts = pts[keep]
    return Mesh(domain, pts, M)


# --- quadrature ---------------------------------------------------------------

RADIAL_NODES_PER_PANEL = 20


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    domain: object
    nodes: np.ndarray
    weights: np.ndarray
    M: int
    measure: str

    def __post_init__(self):
        if self.nodes.shape[0] != self.weights.shape[0]:
            raise ValueError("nodes and weights differ in length")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values) -> complex:
        return np.sum(self.weights * np.asarray(values))


def gauss_legendre(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def composite_gauss_legendre(breaks: Sequence[float], n: int):
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            x, w = gauss_legendre(a, b, n)
            xs.append(x)
            ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def plane_panels(radius: float, M: int) -> int:
    return max(4, math.ceil(radius * math.sqrt(M) / 2))


def _polar_rule(r, wr, n_ang):
    ang = 2 * np.pi * np.arange(n_ang) / n_ang
    nodes = (r[:, None] * np.exp(1j * ang)[None, :]).ravel()
    weights = (wr[:, None] * r[:, None] * (2 * np.pi / n_ang) * np.ones(n_ang)[None, :]).ravel()
    return nodes, weights


def build_quadrature(domain, M: int, normalize: bool = False) -> QuadratureRule:
    """Quadrature for the reference measure on the domain.

    Circle: M-point trapezoid, total mass 1. Interval: M-point Gauss-Legendre,
    mass b - a. Disk/Annulus: M Gauss-Legendre radii x 2M angles, area measure.
    Plane: composite radial Gauss-Legendre on [0, R] x 2M angles, area measure.
    Product of disks: tensor of the two disk rules. ``normalize`` rescales to
    a probability measure.
    """
    if M < 2:
        raise ValueError(f"quadrature resolution M must be >= 2, got {M}")
    measure = "area"
    if isinstance(domain, Circle):
        ang = 2 * np.pi * np.arange(M) / M
        nodes = (domain.radius * np.exp(1j * ang))[:, None]
        weights = np.full(M, 1.0 / M)
        measure = "arclength/normalized"
    elif isinstance(domain, Interval):
        x, w = gauss_legendre(domain.a, domain.b, M)
        nodes, weights = x.astype(complex)[:, None], w
        measure = "lebesgue"
    elif isinstance(domain, Plane):
        r, wr = composite_gauss_legendre(
            np.linspace(0.0, domain.r_out, plane_panels(domain.r_out, M) + 1), RADIAL_NODES_PER_PANEL
        )
        nodes, weights = _polar_rule(r, wr, 2 * M)
        nodes = nodes[:, None]
    elif isinstance(domain, Annulus):
        r, wr = gauss_legendre(domain.r_in, domain.r_out, M)
        nodes, weights = _polar_rule(r, wr, 2 * M)
        nodes = nodes[:, None]
    elif isinstance(domain, ProductOfDisks):
        rules = [build_quadrature(Disk(R), M) for R in domain.radii]
        n1, n2 = rules[0].nodes[:, 0], rules[1].nodes[:, 0]
        nodes = np.stack([np.repeat(n1, n2.size), np.tile(n2, n1.size)], axis=1)
        weights = np.outer(rules[0].weights, rules[1].weights).ravel()
    elif isinstance(domain, PointCloud):
        nodes = domain.points.copy()
        weights = np.full(nodes.shape[0], 1.0 / nodes.shape[0])
        measure = "counting/normalized"
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    if normalize:
        weights = weights / weights.sum()
        if "normalized" not in measure:
            measure += "/normalized"
    return QuadratureRule(domain, nodes, weights, M, measure)


# --- admissibility ------------------------------------------------------------


class NotAdmissibleError(ValueError):
    pass


@dataclass
class AdmissibilityReport:
    is_admissible: bool
    violations: List[str] = field(default_factory=list)

    @property
    def first_violation(self) -> Optional[str]:
        return self.violations[0] if self.violations else None


def _finite_w(weight: WeightSpec, r) -> Tuple[np.ndarray, Optional[str]]:
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            w = weight.w(r)
    except radial_expr.ExprDomainError as exc:
        return np.zeros_like(r), f"weight not evaluable: {exc}"
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        return w, "weight is not finite and non-negative on the mesh"
    return w, None


def admissibility_check(weight: WeightSpec, domain, M: int = 16) -> AdmissibilityReport:
    """Numerical proxies for admissibility.

    (i) w > 0 on a full mesh circle or segment (stand-in for non-pluripolarity
    of {w > 0}); (ii) on unbounded domains r w(r) < 1e-6 at r = 2**40 on a
    geometric ladder; (iii) for global weights with eps > 0, Q(r) >= (1+eps) log r
    for sampled r past the point where it first holds.
    """
    violations = []
    if isinstance(domain, Plane):
        pts = build_mesh(Disk(domain.r_out), M).points
    else:
        pts = build_mesh(domain, M).points
    r = np.sqrt((np.abs(pts) ** 2).sum(axis=1))
    w, err = _finite_w(weight, r)
    if err:
        violations.append(f"(finite) {err}")
    else:
        pos = w > 0
        if isinstance(domain, Annulus):
            rings = np.unique(np.round(r[r > 0], 12))
            ok = any(bool(np.all(pos[np.abs(r - rr) < 1e-9])) for rr in rings)
        elif isinstance(domain, Interval):
            ok = bool(np.any(pos[:-1] & pos[1:]))
        elif isinstance(domain, Circle):
            ok = bool(np.all(pos))
        else:
            ok = bool(np.any(pos))
        if not ok:
            violations.append("(i) w vanishes somewhere on every mesh circle/segment")
    if not getattr(domain, "bounded", True):
        ladder = 2.0 ** np.arange(0, 41)
        wl, err = _finite_w(weight, ladder)
        if err:
            violations.append(f"(ii) {err}")
        elif not ladder[-1] * wl[-1] < 1e-6:
            violations.append("(ii) r*w(r) does not decay below 1e-6 by r = 2**40")
        elif weight.eps > 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                ok = weight.Q(ladder) >= (1 + weight.eps) * np.log(ladder)
            bad = np.nonzero(~ok)[0]
            if bad.size and bad[-1] >= len(ladder) - 10:
                violations.append(f"(iii) Q(r) < (1+eps) log r for large r, eps={weight.eps}")
    return AdmissibilityReport(not violations, violations)


SCAN_STEP = 0.1
SCAN_LINEAR_MAX = 100.0


def truncation_radius(weight: WeightSpec, C: float = 0.0) -> float:
    """Smallest scanned rho with Q(r) - log r >= C + 1 for every scanned r >= rho.

    The scan runs in steps of 0.1 up to 100 and continues on the ladder 2**k,
    k = 7..40.
    """
    report = admissibility_check(weight, Plane(4.0))
    if not report.is_admissible:
        raise NotAdmissibleError(report.first_violation)
    lin = SCAN_STEP * np.arange(1, int(round(SCAN_LINEAR_MAX / SCAN_STEP)) + 1)
    scan = np.concatenate([lin, 2.0 ** np.arange(7, 41)])
    ok = weight.Q(scan) - np.log(scan) >= C + 1
    if not ok[-1]:
        raise NotAdmissibleError(f"Q(r) - log r stays below C+1={C + 1} on the scan ladder")
    bad = np.nonzero(~ok)[0]
    k = 0 if bad.size == 0 else bad[-1] + 1
    return float(np.round(scan[k], 12))


def quadrature_csv_rows(rule: QuadratureRule):
    for z, w in zip(rule.nodes, rule.weights):
        row = []
        for c in z:
            row += [c.real, c.imag]
        yield row + [w]
