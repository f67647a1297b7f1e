"""Test functions on R^k.

:class:`PiecewisePowerFunction` is the main class: radial, with finitely
many annular pieces ``c |t|^gamma`` on ``a <= |t| < b``.  Multiplying by a
power weight shifts every gamma, and dilation maps pieces to pieces, so
norms and distribution functions stay in closed form.

Two non-radial helpers cover constructions the radial class cannot
express: tensor products of a one-dimensional profile, and indicators of
translated balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import MalformedInputError

INF = math.inf


def ball_volume(k: int) -> float:
    """Lebesgue measure of the unit ball in R^k."""
    if k % 2 == 0:
        return math.pi ** (k // 2) / math.factorial(k // 2)
    # odd k: 2^k ((k-1)/2)! pi^((k-1)/2) / k!, exact 2 for k = 1
    m = (k - 1) // 2
    return 2 ** k * math.factorial(m) * math.pi ** m / math.factorial(k)


def _norms(points, k):
    pts = np.asarray(points, dtype=float)
    if k == 1 and pts.ndim == 1:
        return np.abs(pts)
    return np.linalg.norm(pts.reshape(-1, k), axis=1)


@dataclass(frozen=True)
class Piece:
    a: float
    b: float
    c: float
    gamma: float

    def value(self, r: float) -> float:
        if self.c == 0:
            return 0.0
        if self.gamma == 0:
            return self.c
        if r == 0:
            return INF if self.gamma < 0 else 0.0
        return self.c * r ** self.gamma


@dataclass(frozen=True)
class PiecewisePowerFunction:
    k: int
    pieces: tuple

    def __init__(self, k, pieces):
        if isinstance(k, bool) or int(k) != k or not 1 <= int(k) <= 4:
            raise MalformedInputError(f"k must be an integer in 1..4, got {k!r}")
        out = []
        for p in pieces:
            if not isinstance(p, Piece):
                p = Piece(*(float(x) for x in p))
            if not (p.a >= 0 and p.b > p.a and p.c >= 0) or math.isinf(p.a):
                raise MalformedInputError(f"invalid piece {p}")
            if math.isnan(p.gamma) or math.isinf(p.gamma) or math.isnan(p.c) or math.isinf(p.c):
                raise MalformedInputError(f"invalid piece {p}")
            out.append(p)
        out.sort(key=lambda p: p.a)
        for p, q in zip(out, out[1:]):
            if q.a < p.b:
                raise MalformedInputError("pieces must have disjoint radial intervals")
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "pieces", tuple(out))

    # constructors -------------------------------------------------------

    @classmethod
    def indicator(cls, a, b, k=1, c=1.0):
        """c on the annulus a <= |t| < b."""
        return cls(k, [Piece(float(a), float(b), float(c), 0.0)])

    @classmethod
    def power(cls, gamma, a=0.0, b=INF, k=1, c=1.0):
        """c |t|^gamma on a <= |t| < b (global power when a=0, b=inf)."""
        return cls(k, [Piece(float(a), float(b), float(c), float(gamma))])

    @classmethod
    def zero(cls, k=1):
        return cls(k, [])

    # algebra ------------------------------------------------------------

    def weighted(self, lam) -> "PiecewisePowerFunction":
        """|t|^lam f(t)."""
        lam = float(lam)
        return PiecewisePowerFunction(
            self.k, [Piece(p.a, p.b, p.c, p.gamma + lam) for p in self.pieces]
        )

    def dilate(self, R) -> "PiecewisePowerFunction":
        """t -> f(t / R)."""
        R = float(R)
        if R <= 0:
            raise MalformedInputError("dilation factor must be positive")
        return PiecewisePowerFunction(
            self.k,
            [Piece(p.a * R, p.b * R, p.c * R ** (-p.gamma), p.gamma) for p in self.pieces],
        )

    def scaled(self, factor) -> "PiecewisePowerFunction":
        factor = float(factor)
        return PiecewisePowerFunction(
            self.k, [Piece(p.a, p.b, p.c * factor, p.gamma) for p in self.pieces]
        )

    def __mul__(self, other: "PiecewisePowerFunction") -> "PiecewisePowerFunction":
        if not isinstance(other, PiecewisePowerFunction):
            return NotImplemented
        if other.k != self.k:
            raise MalformedInputError("cannot multiply functions on different R^k")
        out = []
        for p in self.pieces:
            for q in other.pieces:
                lo, hi = max(p.a, q.a), min(p.b, q.b)
                if lo < hi:
                    out.append(Piece(lo, hi, p.c * q.c, p.gamma + q.gamma))
        return PiecewisePowerFunction(self.k, out)

    # queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return all(p.c == 0 for p in self.pieces)

    def support_radius(self) -> float:
        live = [p.b for p in self.pieces if p.c > 0]
        return max(live) if live else 0.0

    def coordinate_bounds(self):
        """Per-coordinate box containing the support, or None if unbounded."""
        r = self.support_radius()
        if math.isinf(r):
            return None
        return np.full(self.k, -r), np.full(self.k, r)

    def breakpoints(self):
        """Positive finite values c a^gamma, c b^gamma where the level sets
        change character."""
        vals = set()
        for p in self.pieces:
            if p.c == 0:
                continue
            for r in (p.a, p.b):
                if r > 0 and not math.isinf(r):
                    vals.add(p.c * r ** p.gamma)
        return sorted(vals)

    def evaluate_radial(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for p in self.pieces:
            if p.c == 0:
                continue
            mask = (r >= p.a) & (r < p.b)
            if not mask.any():
                continue
            if p.gamma == 0:
                out[mask] = p.c
            else:
                with np.errstate(divide="ignore"):
                    out[mask] = p.c * r[mask] ** p.gamma
        return out

    def value_at_radius(self, r: float) -> float:
        for p in self.pieces:
            if p.a <= r < p.b:
                return p.value(r)
        return 0.0

    def evaluate(self, points):
        """Values at points of R^k, given as an (n, k) array (or (n,) for k=1)."""
        return self.evaluate_radial(_norms(points, self.k))

    def intervals_1d(self):
        """Exact interval decomposition for k = 1 indicator sums:
        list of (lo, hi, value) with Fractions (None for an infinite end).
        Returns None when some piece is not constant."""
        if self.k != 1 or any(p.gamma != 0 and p.c != 0 for p in self.pieces):
            return None
        out = []
        for p in self.pieces:
            if p.c == 0:
                continue
            c = Fraction(p.c)
            hi = None if math.isinf(p.b) else Fraction(p.b)
            lo = Fraction(p.a)
            if lo == 0:
                out.append((None if hi is None else -hi, hi, c))
            else:
                out.append((lo, hi, c))
                out.append((None if hi is None else -hi, -lo, c))
        return out


@dataclass(frozen=True)
class TensorProductFunction:
    """F(t_1, ..., t_k) = prod_i f(t_i) for a one-dimensional profile f."""

    factor: PiecewisePowerFunction
    k: int

    def __post_init__(self):
        if self.factor.k != 1:
            raise MalformedInputError("tensor factor must be a function on R")

    def is_zero(self) -> bool:
        return self.factor.is_zero()

    def coordinate_bounds(self):
        r = self.factor.support_radius()
        if math.isinf(r):
            return None
        return np.full(self.k, -r), np.full(self.k, r)

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.k)
        out = np.ones(pts.shape[0])
        for i in range(self.k):
            out *= self.factor.evaluate_radial(np.abs(pts[:, i]))
        return out

    def intervals_1d(self):
        return self.factor.intervals_1d() if self.k == 1 else None


@dataclass(frozen=True)
class TranslatedBallIndicator:
    """value * 1{|t - center| <= radius}."""

    center: tuple
    radius: float
    value: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise MalformedInputError("radius must be positive")

    @property
    def k(self) -> int:
        return len(self.center)

    def is_zero(self) -> bool:
        return self.value == 0

    def coordinate_bounds(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.k)
        d = np.linalg.norm(pts - np.array(self.center), axis=1)
        return np.where(d <= self.radius, self.value, 0.0)

    def intervals_1d(self):
        if self.k != 1:
            return None
        c, r = Fraction(self.center[0]), Fraction(self.radius)
        return [(c - r, c + r, Fraction(self.value))]
