"""Exact theta arithmetic and the degree-band index sets of incomplete polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, gcd
from typing import Tuple

MultiIndex = Tuple[int, ...]

MAX_DENOMINATOR = 10**6


@dataclass(frozen=True, order=False)
class Theta:
    """A rational parameter p/q in [0, 1], stored in lowest terms."""

    p: int
    q: int = 1

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if q <= 0:
            raise ValueError(f"theta denominator must be positive, got {q}")
        if not 0 <= p <= q:
            raise ValueError(f"theta must lie in [0, 1], got {p}/{q}")
        g = gcd(p, q) or 1
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)

    @classmethod
    def parse(cls, text) -> "Theta":
        """Accept ``"p/q"``, an exact decimal with denominator <= 10**6, or a Theta."""
        if isinstance(text, Theta):
            return text
        if isinstance(text, Fraction):
            frac = text
        elif isinstance(text, int):
            frac = Fraction(text)
        else:
            s = str(text).strip()
            try:
                frac = Fraction(s)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"cannot parse theta from {text!r}") from exc
        if frac.denominator > MAX_DENOMINATOR:
            raise ValueError(
                f"theta {text!r} needs denominator {frac.denominator} > {MAX_DENOMINATOR}"
            )
        return cls(frac.numerator, frac.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return str(self.p) if self.q == 1 else f"{self.p}/{self.q}"

    def __lt__(self, other: "Theta") -> bool:
        return self.fraction < Theta.parse(other).fraction

    def __le__(self, other: "Theta") -> bool:
        return self.fraction <= Theta.parse(other).fraction


def ceil_mul(N: int, theta: Theta) -> int:
    """Return ceil(N * theta) in exact integer arithmetic."""
    theta = Theta.parse(theta)
    return (N * theta.p + theta.q - 1) // theta.q


def floor_mul(N: int, theta: Theta) -> int:
    theta = Theta.parse(theta)
    return (N * theta.p) // theta.q


@dataclass(frozen=True)
class IncompleteIndexSet:
    """Multi-indices with ceil(N theta) <= |alpha| <= N in graded lex order."""

    N: int
    theta: Theta
    dim_space: int
    indices: Tuple[MultiIndex, ...]

    @property
    def low(self) -> int:
        return ceil_mul(self.N, self.theta)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, i):
        return self.indices[i]

    def degrees(self) -> Tuple[int, ...]:
        return tuple(sum(a) for a in self.indices)

    def position(self, alpha: MultiIndex) -> int:
        return self.indices.index(tuple(alpha))


def homogeneous_indices(m: int, d: int) -> list:
    """All alpha in N^d with |alpha| = m, sorted lexicographically ascending."""
    out = []
    for combo in combinations_with_replacement(range(d), m):
        alpha = [0] * d
        for k in combo:
            alpha[k] += 1
        out.append(tuple(alpha))
    out.sort()
    return out


def enumerate_index_set(N: int, theta, d: int = 1) -> IncompleteIndexSet:
    if N < 0:
        raise ValueError("N must be non-negative")
    if d < 1:
        raise ValueError("dimension d must be at least 1")
    theta = Theta.parse(theta)
    indices = []
    for m in range(ceil_mul(N, theta), N + 1):
        indices.extend(homogeneous_indices(m, d))
    return IncompleteIndexSet(N, theta, d, tuple(indices))


def dim(N: int, theta, d: int = 1) -> int:
    """Dimension of the space of theta-incomplete polynomials, by binomial sum."""
    if N < 0 or d < 1:
        raise ValueError("need N >= 0 and d >= 1")
    theta = Theta.parse(theta)
    return sum(comb(m + d - 1, d - 1) for m in range(ceil_mul(N, theta), N + 1))
