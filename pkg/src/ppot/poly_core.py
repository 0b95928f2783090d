"""Sparse multivariate polynomials with complex coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .index_core import MultiIndex, Theta, ceil_mul, floor_mul

DROP_BELOW = 1e-300


def as_points(z, d: Optional[int] = None) -> np.ndarray:
    """Coerce a point or a list of points to a complex array of shape (n, d)."""
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if d in (None, 1) else arr.reshape(1, -1)
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"points have dimension {arr.shape[1]}, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must have finite coordinates")
    return arr


def _clean(coeffs: Dict[MultiIndex, complex]) -> Dict[MultiIndex, complex]:
    return {tuple(int(a) for a in k): complex(v) for k, v in coeffs.items() if abs(v) >= DROP_BELOW}


@dataclass(frozen=True)
class MultiPolynomial:
    d: int
    coeffs: Dict[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = _clean(self.coeffs)
        for alpha in cleaned:
            if len(alpha) != self.d or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha} for dimension {self.d}")
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def monomial(cls, alpha, c=1.0) -> "MultiPolynomial":
        alpha = tuple(alpha)
        return cls(len(alpha), {alpha: c})

    @classmethod
    def from_univariate(cls, coefficients: Iterable[complex]) -> "MultiPolynomial":
        """Build a one-variable polynomial from coefficients in ascending degree."""
        return cls(1, {(k,): c for k, c in enumerate(coefficients)})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        if self.is_zero:
            return -1
        return max(sum(a) for a in self.coeffs)

    @property
    def valuation(self) -> int:
        if self.is_zero:
            return -1
        return min(sum(a) for a in self.coeffs)

    def __add__(self, other: "MultiPolynomial") -> "MultiPolynomial":
        _check_dim(self, other)
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0) + c
        return MultiPolynomial(self.d, out)

    def __sub__(self, other: "MultiPolynomial") -> "MultiPolynomial":
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, MultiPolynomial):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c: complex) -> "MultiPolynomial":
        return MultiPolynomial(self.d, {a: c * v for a, v in self.coeffs.items()})

    def __call__(self, z):
        return evaluate(self, z)

    def _arrays(self):
        alphas = np.array(list(self.coeffs), dtype=int).reshape(-1, self.d)
        cs = np.array(list(self.coeffs.values()), dtype=complex)
        return alphas, cs

    def to_text(self, N: Optional[int] = None, theta=None) -> str:
        return dumps(self, N, theta)


def _check_dim(p: MultiPolynomial, q: MultiPolynomial):
    if p.d != q.d:
        raise ValueError(f"dimension mismatch: {p.d} vs {q.d}")


def _power_table(points: np.ndarray, max_deg: int) -> np.ndarray:
    """table[k, i, j] = points[i, j] ** k, built by repeated multiplication."""
    n, d = points.shape
    table = np.empty((max_deg + 1, n, d), dtype=complex)
    table[0] = 1.0
    for k in range(1, max_deg + 1):
        table[k] = table[k - 1] * points
    return table


def monomial_matrix(points: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """Values of z**alpha, shape (n_points, n_alphas)."""
    alphas = np.asarray(alphas, dtype=int).reshape(-1, points.shape[1])
    max_deg = int(alphas.max()) if alphas.size else 0
    table = _power_table(points, max_deg)
    out = np.ones((points.shape[0], alphas.shape[0]), dtype=complex)
    for j in range(points.shape[1]):
        out *= table[alphas[:, j], :, j].T
    return out


def evaluate(P: MultiPolynomial, z) -> np.ndarray | complex:
    """Evaluate P at one point (returns a complex) or at an (n, d) array of points."""
    pts = as_points(z, P.d)
    single = np.ndim(z) == 0 or (np.ndim(z) == 1 and P.d > 1)
    if P.is_zero:
        vals = np.zeros(pts.shape[0], dtype=complex)
    else:
        alphas, cs = P._arrays()
        vals = monomial_matrix(pts, alphas) @ cs
    return complex(vals[0]) if single else vals


def log_abs(P: MultiPolynomial, z) -> np.ndarray:
    """log|P(z)| via monomials (z/s)**alpha with s = max(1, |z|_inf) per point.

    Avoids overflow for degrees in the hundreds at exterior points.
    """
    pts = as_points(z, P.d)
    if P.is_zero:
        return np.full(pts.shape[0], -np.inf)
    alphas, cs = P._arrays()
    degs = alphas.sum(axis=1)
    top = degs.max()
    s = np.maximum(1.0, np.abs(pts).max(axis=1))
    scaled = monomial_matrix(pts / s[:, None], alphas)
    # s**(|alpha| - deg) underflows gracefully for the low-degree terms
    with np.errstate(under="ignore"):
        rel = np.exp(np.outer(np.log(s), degs - top))
    with np.errstate(divide="ignore"):
        return np.log(np.abs((scaled * rel) @ cs)) + top * np.log(s)


def multiply(P: MultiPolynomial, Q: MultiPolynomial) -> MultiPolynomial:
    _check_dim(P, Q)
    out: Dict[MultiIndex, complex] = {}
    for a, c in P.coeffs.items():
        for b, e in Q.coeffs.items():
            k = tuple(x + y for x, y in zip(a, b))
            out[k] = out.get(k, 0) + c * e
    return MultiPolynomial(P.d, out)


def is_incomplete(P: MultiPolynomial, N: int, theta) -> bool:
    if P.is_zero:
        return True
    lo = ceil_mul(N, Theta.parse(theta))
    return lo <= P.valuation and P.degree <= N


def split_incomplete(P: MultiPolynomial, N: int, theta) -> Tuple[MultiPolynomial, MultiPolynomial]:
    """Split P (degree <= N) into terms of degree <= floor(N theta) and the rest.

    The remainder lies in the theta-incomplete band of degree N.
    """
    if P.degree > N:
        raise ValueError(f"degree {P.degree} exceeds N={N}")
    cut = floor_mul(N, Theta.parse(theta))
    low = {a: c for a, c in P.coeffs.items() if sum(a) <= cut}
    tail = {a: c for a, c in P.coeffs.items() if sum(a) > cut}
    return MultiPolynomial(P.d, low), MultiPolynomial(P.d, tail)


@dataclass(frozen=True)
class SupNorm:
    value: float
    argmax: np.ndarray
    index: int


def sup_norm_on_mesh(P: MultiPolynomial, mesh, weight=None, N: Optional[int] = None) -> SupNorm:
    """max |P| (or max w**N |P|) over the mesh points, with the maximizing point."""
    pts = getattr(mesh, "points", mesh)
    pts = as_points(pts, P.d)
    if pts.shape[0] == 0:
        raise ValueError("empty mesh")
    logs = log_abs(P, pts)
    if weight is not None:
        if N is None:
            raise ValueError("a weighted sup-norm needs N")
        logs = logs - N * weight.Q_points(pts)
    i = int(np.argmax(logs))
    return SupNorm(float(np.exp(logs[i])), pts[i], i)


# --- text serialization -------------------------------------------------------


def dumps(P: MultiPolynomial, N: Optional[int] = None, theta=None) -> str:
    """Header ``d N theta`` then one ``re im a_1 .. a_d`` line per term."""
    N = P.degree if N is None else N
    theta = Theta(0) if theta is None else Theta.parse(theta)
    lines = [f"{P.d} {max(N, 0)} {theta}"]
    for alpha in sorted(P.coeffs, key=lambda a: (sum(a), a)):
        c = P.coeffs[alpha]
        exps = " ".join(str(a) for a in alpha)
        lines.append(f"{c.real:.17g} {c.imag:.17g} {exps}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Tuple[MultiPolynomial, int, Theta]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty polynomial text")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"bad header {lines[0]!r}, expected 'd N theta'")
    d, N, theta = int(head[0]), int(head[1]), Theta.parse(head[2])
    coeffs = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != d + 2:
            raise ValueError(f"bad term line {ln!r}")
        coeffs[tuple(int(a) for a in parts[2:])] = complex(float(parts[0]), float(parts[1]))
    return MultiPolynomial(d, coeffs), N, theta
