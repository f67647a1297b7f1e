"""Distribution functions and weighted Lorentz quasi-norms.

Normalisation: ||g||_{p,r} = (int_0^inf (t^{1/p} g*(t))^r dt/t)^{1/r}
             = (p int_0^inf s^{r-1} d_g(s)^{r/p} ds)^{1/r},
so that ||g||_{p,p} is the L^p norm, and ||g||_{p,inf} = sup_s s d_g(s)^{1/p}.
The weighted quasi-norm is ||f||_{L^{p,r}_lam} = || |.|^lam f ||_{p,r}.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize
from scipy.special import betainc

from .errors import MalformedInputError, PreconditionError
from .functions import (
    INF,
    PiecewisePowerFunction,
    TranslatedBallIndicator,
    ball_volume,
)
from .rational import to_rational

_EXP_TOL = 1e-12


def _annulus(k, lo, hi):
    if hi <= lo:
        return 0.0
    if math.isinf(hi):
        return INF
    return ball_volume(k) * (hi ** k - lo ** k)


def _level_radius(s, c, gamma):
    """Radius where c r^gamma = s, saturating to 0 / inf instead of overflowing."""
    if s <= 0:
        return INF if gamma < 0 else 0.0
    t = (math.log(s) - math.log(c)) / gamma
    if t > 700.0:
        return INF
    if t < -700.0:
        return 0.0
    return math.exp(t)


def _measure(f: PiecewisePowerFunction, s: float, strict: bool = True) -> float:
    """|{f > s}| (or |{f >= s}| when strict is False)."""
    total = 0.0
    k = f.k
    for p in f.pieces:
        if p.c == 0:
            continue
        if p.gamma == 0:
            if p.c > s or (not strict and p.c >= s):
                total += _annulus(k, p.a, p.b)
            continue
        rho = _level_radius(s, p.c, p.gamma)
        if p.gamma > 0:
            total += _annulus(k, max(p.a, rho), p.b)
        else:
            total += _annulus(k, p.a, min(p.b, rho))
    return total


def distribution_function(f: PiecewisePowerFunction, s: float) -> float:
    """Measure of {x in R^k : f(x) > s}."""
    if not s > 0:
        raise MalformedInputError("s must be positive")
    return _measure(f, float(s))


def _singular_piece(f):
    """The live piece reaching r = 0 with gamma < 0, if any."""
    for p in f.pieces:
        if p.c > 0 and p.a == 0 and p.gamma < 0:
            return p
    return None


def _outer_piece(f):
    for p in f.pieces:
        if p.c > 0 and math.isinf(p.b):
            return p
    return None


def _lp_closed_form(g: PiecewisePowerFunction, p: float) -> float:
    """int |g|^p over R^k, piece by piece."""
    k = g.k
    total = 0.0
    for pc in g.pieces:
        if pc.c == 0:
            continue
        e = pc.gamma * p + k
        scale = pc.c ** p * k * ball_volume(k)
        if abs(e) < _EXP_TOL:
            if pc.a == 0 or math.isinf(pc.b):
                return INF
            total += scale * math.log(pc.b / pc.a)
        elif e > 0:
            if math.isinf(pc.b):
                return INF
            total += scale * (pc.b ** e - pc.a ** e) / e
        else:
            if pc.a == 0:
                return INF
            hi = 0.0 if math.isinf(pc.b) else pc.b ** e
            total += scale * (pc.a ** e - hi) / (-e)
    return total


def _sup_value(g: PiecewisePowerFunction) -> float:
    best = 0.0
    for pc in g.pieces:
        if pc.c == 0:
            continue
        if pc.gamma == 0:
            v = pc.c
        elif pc.gamma > 0:
            v = INF if math.isinf(pc.b) else pc.c * pc.b ** pc.gamma
        else:
            v = INF if pc.a == 0 else pc.c * pc.a ** pc.gamma
        best = max(best, v)
    return best


def _tail_exponents(g, p):
    """Exponents e with s d(s)^{1/p} ~ s^e as s -> 0 and s -> inf."""
    k = g.k
    outer = _outer_piece(g)
    sing = _singular_piece(g)
    e0 = 1.0 if outer is None else 1.0 + k / (outer.gamma * p)
    einf = None if sing is None else 1.0 + k / (sing.gamma * p)
    return e0, einf


def _infinite_measure(g):
    outer = _outer_piece(g)
    return outer is not None and outer.gamma >= 0


def _weak_norm(g: PiecewisePowerFunction, p: float) -> float:
    if g.is_zero():
        return 0.0
    if _infinite_measure(g):
        return INF
    e0, einf = _tail_exponents(g, p)
    if e0 < -_EXP_TOL or (einf is not None and einf > _EXP_TOL):
        return INF

    def phi(s, strict=True):
        return s * _measure(g, s, strict) ** (1.0 / p)

    bps = g.breakpoints()
    cands = []
    for s in bps:
        cands.append(phi(s))
        cands.append(phi(s, strict=False))

    def scan(u_lo, u_hi):
        us = np.linspace(u_lo, u_hi, 129)[1:-1]
        vals = np.array([phi(math.exp(u)) for u in us])
        i = int(np.argmax(vals))
        lo, hi = us[max(i - 1, 0)], us[min(i + 1, len(us) - 1)]
        res = optimize.minimize_scalar(lambda u: -phi(math.exp(u)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-12})
        return max(float(vals[i]), -float(res.fun))

    logs = [math.log(s) for s in bps]
    for u0, u1 in zip(logs, logs[1:]):
        cands.append(scan(u0, u1))
    if logs:
        # below the smallest breakpoint several pieces may still be partial
        cands.append(scan(logs[0] - 60.0, logs[0]))
        if abs(e0) <= _EXP_TOL:
            cands.append(phi(math.exp(logs[0] - 700.0)))
    else:
        # a single global power: phi is a pure power of s
        cands.append(phi(1.0))
    return max(cands)


def _general_norm(g: PiecewisePowerFunction, p: float, r: float) -> float:
    if g.is_zero():
        return 0.0
    if _infinite_measure(g):
        return INF
    e0, einf = _tail_exponents(g, p)
    if e0 <= _EXP_TOL or (einf is not None and einf >= -_EXP_TOL):
        return INF
    k = g.k

    def integrand(u):
        s = math.exp(u)
        d = _measure(g, s)
        if d == 0:
            return 0.0
        return s ** r * d ** (r / p)

    bps = g.breakpoints()
    if not bps:
        raise AssertionError("pure power has an infinite norm; handled above")
    logs = [math.log(s) for s in bps]
    total = 0.0
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=400)
    val, _ = integrate.quad(integrand, -INF, logs[0], **opts)
    total += val
    for u0, u1 in zip(logs, logs[1:]):
        val, _ = integrate.quad(integrand, u0, u1, **opts)
        total += val
    sing = _singular_piece(g)
    if sing is not None:
        # beyond the last breakpoint only the singular piece is partial:
        # d(s) = omega (s/c)^{k/gamma}, integrand a single power of s
        s_max = bps[-1]
        coef = ball_volume(k) ** (r / p) * sing.c ** (-r * k / (sing.gamma * p))
        total += coef * s_max ** (r * einf) / (-r * einf)
    return (p * total) ** (1.0 / r)


def lorentz_norm(f: PiecewisePowerFunction, inv_p, inv_r, lam=0) -> float:
    """||f||_{L^{p,r}_lam}; +inf when the defining integral diverges."""
    inv_p, inv_r, lam = to_rational(inv_p), to_rational(inv_r), to_rational(lam)
    if not (0 <= inv_p <= 1 and 0 <= inv_r <= 1):
        raise MalformedInputError("1/p and 1/r must lie in [0, 1]")
    g = f.weighted(lam) if lam != 0 else f
    if inv_p == 0:
        if inv_r != 0:
            raise MalformedInputError("1/p = 0 requires 1/r = 0 (the sup norm)")
        return _sup_value(g)
    p = float(1 / inv_p)
    if inv_r == inv_p:
        val = _lp_closed_form(g, p)
        return val if math.isinf(val) else val ** (1.0 / p)
    if inv_r == 0:
        return _weak_norm(g, p)
    return _general_norm(g, p, float(1 / inv_r))


def _cap_fraction(k, r, dist, radius):
    """Fraction of the sphere |t| = r lying inside the ball B(m, radius),
    |m| = dist."""
    if dist == 0:
        return 1.0 if r <= radius else 0.0
    if r == 0:
        return 1.0 if dist <= radius else 0.0
    kappa = (r * r + dist * dist - radius * radius) / (2 * r * dist)
    if kappa <= -1:
        return 1.0
    if kappa >= 1:
        return 0.0
    if k == 1:
        return 0.5
    half = 0.5 * betainc((k - 1) / 2, 0.5, 1.0 - kappa * kappa)
    return half if kappa >= 0 else 1.0 - half


def weighted_lp_norm(func, inv_p, lam=0) -> float:
    """|| |.|^lam func ||_{L^p} for a radial function or a translated ball."""
    inv_p, lam = to_rational(inv_p), to_rational(lam)
    if isinstance(func, PiecewisePowerFunction):
        return lorentz_norm(func, inv_p, inv_p, lam)
    if not isinstance(func, TranslatedBallIndicator):
        raise PreconditionError(f"no weighted norm for {type(func).__name__}")
    k = func.k
    m = np.array(func.center)
    dist = float(np.linalg.norm(m))
    rho = func.radius
    lamf = float(lam)
    if inv_p == 0:
        if dist > rho:
            lo, hi = dist - rho, dist + rho
        else:
            lo, hi = 0.0, dist + rho
        if lamf >= 0:
            return func.value * hi ** lamf
        return INF if lo == 0 else func.value * lo ** lamf
    p = float(1 / inv_p)
    e = lamf * p
    if k == 1:
        a, b = m[0] - rho, m[0] + rho

        def prim(t):
            # int_0^t |s|^e ds, odd extension
            if e <= -1 and t == 0:
                return 0.0
            return math.copysign(abs(t) ** (e + 1) / (e + 1), t)

        if a < 0 < b and e <= -1:
            return INF
        return func.value * (prim(b) - prim(a)) ** (1.0 / p)
    if dist <= rho and e <= -k:
        return INF
    area = k * ball_volume(k)

    def integrand(r):
        return r ** (e + k - 1) * area * _cap_fraction(k, r, dist, rho)

    lo = max(0.0, dist - rho)
    pts = [x for x in (rho - dist,) if lo < x < dist + rho]
    val, _ = integrate.quad(integrand, lo, dist + rho, points=pts or None,
                            epsabs=0.0, epsrel=1e-11, limit=400)
    return func.value * val ** (1.0 / p)


def holder_lorentz_check(f1: PiecewisePowerFunction, f2: PiecewisePowerFunction,
                         inv_p1, inv_r1, inv_p2, inv_r2, inv_p=None, inv_r=None) -> float:
    """Ratio ||f1 f2||_{p,r} / (||f1||_{p1,r1} ||f2||_{p2,r2}).

    Requires 1/p = 1/p1 + 1/p2 < 1 and 1/r <= 1/r1 + 1/r2, all in [0, 1].
    """
    q = [to_rational(x) for x in (inv_p1, inv_r1, inv_p2, inv_r2)]
    inv_p1, inv_r1, inv_p2, inv_r2 = q
    total_p = inv_p1 + inv_p2
    inv_p = total_p if inv_p is None else to_rational(inv_p)
    inv_r = min(inv_r1 + inv_r2, Fraction(1)) if inv_r is None else to_rational(inv_r)
    if inv_p != total_p or not inv_p < 1:
        raise PreconditionError("need 1/p = 1/p1 + 1/p2 < 1")
    if not inv_r <= inv_r1 + inv_r2:
        raise PreconditionError("need 1/r <= 1/r1 + 1/r2")
    if not all(0 <= x <= 1 for x in (inv_r, inv_r1, inv_r2)):
        raise PreconditionError("secondary exponents must lie in [0, 1]")
    num = lorentz_norm(f1 * f2, inv_p, inv_r)
    if num == 0:
        return 0.0
    den = lorentz_norm(f1, inv_p1, inv_r1) * lorentz_norm(f2, inv_p2, inv_r2)
    return num / den
