"""The multilinear fractional integral

    T(f_1..f_N)(x) = int_{R^k} |y|^-lam prod_j f_j(x - theta_j y) dy

and the one-dimensional Riesz composition identity used by the boundary
examples.

For k = 1 every factor is a piecewise power of |x0 - theta y|, so the line
splits into segments on which the integrand is smooth.  Endpoint exponents
are read off the pieces, which decides convergence analytically before any
quadrature is attempted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import beta as beta_fn

from .errors import DivergentIntegralError, MalformedInputError, PreconditionError
from .functions import INF, PiecewisePowerFunction, ball_volume
from .rational import to_rational

@dataclass(frozen=True)
class Factor:
    """f(x0 - theta * y) for a radial profile f on R."""

    f: PiecewisePowerFunction
    x0: float
    theta: float

    def radial(self, y: float) -> float:
        return abs(self.x0 - self.theta * y)

    def value(self, y: float) -> float:
        return self.f.value_at_radius(self.radial(y))

    def knots(self):
        out = {self.x0 / self.theta}
        for p in self.f.pieces:
            if p.c == 0:
                continue
            for r in (p.a, p.b):
                if r > 0 and not math.isinf(r):
                    out.add((self.x0 - r) / self.theta)
                    out.add((self.x0 + r) / self.theta)
        return out

    def inner_gamma(self):
        """Exponent of the live piece touching r = 0, if any."""
        for p in self.f.pieces:
            if p.c > 0 and p.a == 0:
                return p.gamma
        return None

    def outer_gamma(self):
        for p in self.f.pieces:
            if p.c > 0 and math.isinf(p.b):
                return p.gamma
        return None


def _endpoint_exponent(factors, y_star):
    """Local exponent e with integrand ~ |y - y_star|^e near y_star (only
    called on segments where the integrand is nonzero)."""
    e = 0.0
    for fc in factors:
        if fc.x0 - fc.theta * y_star == 0:
            g = fc.inner_gamma()
            if g is not None:
                e += g
    return e


def _tail_exponent(factors):
    e = 0.0
    for fc in factors:
        g = fc.outer_gamma()
        if g is None:
            return None
        e += g
    return e


def _product(factors, y):
    v = 1.0
    for fc in factors:
        v *= fc.value(y)
        if v == 0.0:
            return 0.0
    return v


def _anchored(factors, anchor, sign):
    """t -> prod factors(anchor + sign * t), with each radial argument
    formed as |base - theta * sign * t| so that a factor vanishing at the
    anchor keeps full relative precision as t -> 0."""
    parts = []
    for fc in factors:
        base = 0.0 if anchor == fc.x0 / fc.theta else fc.x0 - fc.theta * anchor
        parts.append((fc.f, base, fc.theta * sign))

    def g(t):
        v = 1.0
        for f, base, slope in parts:
            v *= f.value_at_radius(abs(base - slope * t))
            if v == 0.0:
                return 0.0
        return v

    return g


def _quad(g, a, b, tol):
    # convergence is decided analytically before integrating, so QUADPACK's
    # roundoff notices at tight tolerances carry no extra information
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(g, a, b, epsabs=0.0, epsrel=tol, limit=200)[0]


def _quad_toward(g, length, tol):
    """int_0^length g(t) dt, refined dyadically toward t = 0 so that a
    power singularity there is resolved scale by scale."""
    total = 0.0
    hi = length
    for _ in range(400):
        lo = hi / 16.0
        piece = _quad(g, lo, hi, tol)
        total += piece
        hi = lo
        if piece != 0.0 and abs(piece) <= 1e-3 * tol * abs(total):
            break
    return total + _quad(g, 0.0, hi, tol)


def _quad_tail(g, d, tol):
    """int_d^inf g(t) dt in the variable u = log t."""
    def h(u):
        if u > 700.0:
            return 0.0  # beyond double range; the tail is integrable here
        t = math.exp(u)
        return g(t) * t

    return _quad(h, math.log(d), math.inf, tol)


def _quad_segment(factors, lo, hi, tol):
    if math.isinf(lo) and math.isinf(hi):
        total = 0.0
        for sign in (1.0, -1.0):
            g = _anchored(factors, 0.0, sign)
            total += _quad_toward(g, 1.0, tol) + _quad_tail(g, 1.0, tol)
        return total
    if math.isinf(hi):
        g, d = _anchored(factors, lo, 1.0), abs(lo) or 1.0
        return _quad_toward(g, d, tol) + _quad_tail(g, d, tol)
    if math.isinf(lo):
        g, d = _anchored(factors, hi, -1.0), abs(hi) or 1.0
        return _quad_toward(g, d, tol) + _quad_tail(g, d, tol)
    half = 0.5 * (hi - lo)
    return (_quad_toward(_anchored(factors, lo, 1.0), half, tol)
            + _quad_toward(_anchored(factors, hi, -1.0), half, tol))


def integrate_product(factors, tol: float = 1e-8) -> float:
    """int_R prod factors(y) dy, or +inf when it diverges.

    The line is cut at every kink; a segment whose integrand is nonzero is
    checked for a non-integrable endpoint (local exponent <= -1) or tail
    (decay exponent >= -1) before being integrated.
    """
    if any(fc.f.is_zero() for fc in factors):
        return 0.0
    knots = sorted(set().union(*(fc.knots() for fc in factors)))
    edges = [-INF] + knots + [INF]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        if lo == hi:
            continue
        if math.isinf(lo) and math.isinf(hi):
            mid = 0.0
        elif math.isinf(lo):
            mid = hi - 1.0
        elif math.isinf(hi):
            mid = lo + 1.0
        else:
            mid = 0.5 * (lo + hi)
        if _product(factors, mid) == 0.0:
            continue
        for end in (lo, hi):
            if math.isinf(end):
                e = _tail_exponent(factors)
                if e is not None and e >= -1.0:
                    return INF
            elif _endpoint_exponent(factors, end) <= -1.0:
                return INF
        total += _quad_segment(factors, lo, hi, tol)
    return total


def _check_lambda(lam, k):
    # numeric path: plain floats are fine here, strings go through the parser
    lam = float(lam) if isinstance(lam, (int, float)) else float(to_rational(lam))
    if not 0 < lam < k:
        raise MalformedInputError(f"lambda = {lam} must lie in (0, {k})")
    return lam


def apply_fractional_integral(fs, lam, thetas, x, tol: float = 1e-8,
                              seed: int = 0, budget: int = 10**6) -> float:
    """T_{N,lam}(f_1..f_N)(x); +inf when the integral diverges.

    k = 1 uses segment-wise adaptive quadrature.  For k >= 2 the integrand
    is sampled with density proportional to |y|^-lam on the ball that
    contains its support; sampling stops once the standard error drops
    below tol * value or the budget is spent.
    """
    fs = list(fs)
    thetas = [float(t) if isinstance(t, (int, float)) else float(to_rational(t))
              for t in thetas]
    if len(fs) != len(thetas) or not fs:
        raise MalformedInputError("need one theta per function")
    if any(t == 0 for t in thetas):
        raise MalformedInputError("every theta_j must be nonzero")
    k = fs[0].k
    if any(f.k != k for f in fs):
        raise MalformedInputError("all functions must live on the same R^k")
    lam = _check_lambda(lam, k)
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.shape != (k,):
        raise MalformedInputError(f"x must be a point of R^{k}")
    if any(f.is_zero() for f in fs):
        return 0.0
    if k == 1:
        kernel = Factor(PiecewisePowerFunction.power(-lam), 0.0, -1.0)
        factors = [kernel] + [Factor(f, float(xv[0]), t) for f, t in zip(fs, thetas)]
        return integrate_product(factors, tol)
    return _fractional_mc(fs, lam, thetas, xv, tol, seed, budget)


def _fractional_mc(fs, lam, thetas, x, tol, seed, budget):
    k = len(x)
    radii = [(np.linalg.norm(x) + f.support_radius()) / abs(t)
             for f, t in zip(fs, thetas) if not math.isinf(f.support_radius())]
    if not radii:
        raise PreconditionError("at least one function needs bounded support for k >= 2")
    rmax = min(radii)
    mass = k * ball_volume(k) * rmax ** (k - lam) / (k - lam)
    rng = np.random.default_rng(seed)
    chunk = 1 << 16
    acc, acc2, n = 0.0, 0.0, 0
    while n < budget:
        m = min(chunk, budget - n)
        d = rng.standard_normal((m, k))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = rmax * rng.random(m) ** (1.0 / (k - lam))
        y = d * r[:, None]
        vals = np.ones(m)
        for f, t in zip(fs, thetas):
            vals *= f.evaluate(x - t * y)
        acc += vals.sum()
        acc2 += (vals * vals).sum()
        n += m
        mean = acc / n
        var = max(acc2 / n - mean * mean, 0.0)
        if mean > 0 and math.sqrt(var / n) <= tol * mean:
            break
    return mass * acc / n


@dataclass(frozen=True)
class BetaIdentityResult:
    xs: tuple
    values: tuple
    normalized: tuple
    constant: float
    max_deviation: float


def riesz_composition(x: float, lam2: float, lam3: float, tol: float = 1e-10) -> float:
    """F(x) = int_R |x - y|^-lam2 |y|^-lam3 dy by quadrature (k = 1)."""
    factors = [
        Factor(PiecewisePowerFunction.power(-lam2), float(x), 1.0),
        Factor(PiecewisePowerFunction.power(-lam3), 0.0, -1.0),
    ]
    return integrate_product(factors, tol)


def riesz_composition_constant(lam2: float, lam3: float) -> float:
    """Closed form of F(x) |x|^(lam2 + lam3 - 1) on R, as a sum of three
    Beta integrals (y < 0, 0 < y < x, y > x)."""
    s = lam2 + lam3 - 1.0
    return beta_fn(1 - lam2, 1 - lam3) + beta_fn(1 - lam2, s) + beta_fn(1 - lam3, s)


def beta_identity_check(lam2, lam3, xs, k: int = 1, tol: float = 1e-10) -> BetaIdentityResult:
    """Checks that F(x) |x|^(lam2 + lam3 - k) does not depend on x.

    max_deviation is the largest relative distance from the value at the
    first x.
    """
    if k != 1:
        raise PreconditionError("the Beta identity check runs on the k = 1 quadrature path")
    l2, l3 = _check_lambda(lam2, k), _check_lambda(lam3, k)
    if l2 + l3 <= k:
        raise DivergentIntegralError(
            f"lam2 + lam3 = {l2 + l3} <= k: the integral diverges at infinity"
        )
    xs = tuple(float(x) for x in xs)
    if not xs or any(x == 0 for x in xs):
        raise MalformedInputError("evaluation points must be nonzero")
    vals = tuple(riesz_composition(x, l2, l3, tol) for x in xs)
    norm = tuple(v * abs(x) ** (l2 + l3 - k) for v, x in zip(vals, xs))
    ref = norm[0]
    dev = max(abs(n - ref) / abs(ref) for n in norm)
    return BetaIdentityResult(xs, vals, norm, ref, dev)
