"""Necessity witnesses: test-function families whose ratio
Lambda(phi) / prod ||phi_j|| is tracked along a geometric parameter ladder.

A least-squares slope of log(ratio) against log(parameter) is compared
with the exponent predicted by the exact condition slacks.  A clearly
positive growth rate in the direction of the ladder is a finite, checkable
witness that the estimate fails for the given exponents.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import integrate, stats

from .errors import MalformedInputError, PreconditionError
from .forms import FormInstance, evaluate_form
from .fractional import Factor, integrate_product, riesz_composition, riesz_composition_constant
from .functions import PiecewisePowerFunction, TranslatedBallIndicator, ball_volume
from .indices import IndexPoint, VectorFamily, check_necessary, scaling_slack
from .norms import lorentz_norm, weighted_lp_norm
from .rational import to_rational

DEFAULT_LADDER = tuple(2.0 ** i for i in range(3, 11))
INTERPOLATION_LADDER = tuple(2 ** i for i in range(6, 15))
SW2_LADDER = (4, 8, 16, 32, 64, 128)
BETA_LADDER = (1.0, 2.0, 4.0, 8.0, 16.0)
CONSISTENT_TOL = 0.05
GROWTH_THRESHOLD = 0.1
MIN_R2 = 0.98
ANGLES = 720


class WitnessKind(str, enum.Enum):
    SCALING = "SCALING"
    HYPER = "HYPER"
    INDEX = "INDEX"
    INTERPOLATION = "INTERPOLATION"
    BETA_IDENTITY = "BETA_IDENTITY"
    SW2_BOUNDARY = "SW2_BOUNDARY"


class Verdict(str, enum.Enum):
    UNBOUNDED_WITNESS = "UNBOUNDED_WITNESS"
    CONSISTENT = "CONSISTENT"
    INCONCLUSIVE = "INCONCLUSIVE"


class Sw2Mode(str, enum.Enum):
    FAILING = "FAILING"
    POSITIVE = "POSITIVE"


@dataclass(frozen=True)
class WitnessSpec:
    kind: WitnessKind
    idx: Optional[IndexPoint] = None
    fam: Optional[VectorFamily] = None
    ladder: Optional[tuple] = None
    seed: int = 0
    ell: Optional[int] = None
    epsilon: Fraction = Fraction(1, 10)
    direction: Optional[str] = None  # "inf", "zero", or None for automatic
    lam2: Optional[Fraction] = None
    lam3: Optional[Fraction] = None
    mode: Optional[Sw2Mode] = None
    budget: int = 10**5
    tol: float = CONSISTENT_TOL

    def __post_init__(self):
        object.__setattr__(self, "kind", WitnessKind(self.kind))
        if self.ladder is not None:
            lad = tuple(float(x) for x in self.ladder)
            _check_ladder(lad)
            object.__setattr__(self, "ladder", lad)
        if self.direction not in (None, "inf", "zero"):
            raise MalformedInputError("direction must be 'inf' or 'zero'")
        if self.mode is not None:
            object.__setattr__(self, "mode", Sw2Mode(self.mode))


@dataclass(frozen=True)
class DataPoint:
    param: float
    value: float
    norms: tuple
    ratio: float


@dataclass
class WitnessReport:
    kind: WitnessKind
    measured_slope: float
    predicted_slope: Optional[Fraction]
    residual: float
    r_squared: float
    verdict: Verdict
    direction: str
    data_points: list
    diagnostics: dict = field(default_factory=dict)


def _check_ladder(lad):
    if len(lad) < 4:
        raise MalformedInputError("a ladder needs at least 4 points")
    if any(x <= 0 for x in lad):
        raise MalformedInputError("ladder values must be positive")
    if any(b <= a for a, b in zip(lad, lad[1:])):
        raise MalformedInputError("ladder must be strictly increasing")


def geometric_ladder(lo: float, hi: float, n: int) -> tuple:
    """n points from lo to hi, equally spaced in log."""
    if n < 2 or not 0 < lo < hi:
        raise MalformedInputError("ladder needs 0 < lo < hi and n >= 2")
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


def _as_fraction(x) -> Fraction:
    # numeric conveniences: 0.6 means 3/5 here, unlike the exact checkers
    if isinstance(x, float):
        return Fraction(repr(x))
    return to_rational(x)


def fit_slope(params, ratios):
    """OLS slope of log(ratio) on log(param): (slope, rms residual, R^2)."""
    x = np.log(np.asarray(params, dtype=float))
    r = np.asarray(ratios, dtype=float)
    if not np.all((r > 0) & np.isfinite(r)):
        raise PreconditionError("ratios must be positive and finite to fit a slope")
    y = np.log(r)
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-24 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(res.slope), rms, r2


def decide(slope, r2, predicted, sign, tol=CONSISTENT_TOL) -> Verdict:
    """sign = +1 when the ladder runs toward infinity, -1 toward zero."""
    matches = predicted is None or abs(slope - float(predicted)) <= tol
    if slope * sign > GROWTH_THRESHOLD and r2 > MIN_R2 and matches:
        return Verdict.UNBOUNDED_WITNESS
    if predicted is not None and matches:
        return Verdict.CONSISTENT
    return Verdict.INCONCLUSIVE


# -- scaling family ----------------------------------------------------------


@dataclass(frozen=True)
class ScalingGeometry:
    w1: tuple
    w2: tuple
    eps: float
    c0: float

    def set_measure(self, k: int) -> float:
        """|S| for S = {y w1 + eps y' w2 : 1 <= |y|, |y'| <= 2}."""
        shell = ball_volume(k) * (2 ** k - 1)
        return (self.eps ** k) * shell ** 2


def _c0(fam, w1, w2, eps):
    c0 = 0.0
    for v in fam.vectors:
        a = abs(float(v[0]) * w1[0] + float(v[1]) * w1[1])
        b = abs(float(v[0]) * w2[0] + float(v[1]) * w2[1])
        lo = a - 2 * eps * b
        if lo <= 0:
            return math.inf
        c0 = max(c0, 2 * a + 2 * eps * b, 1.0 / lo)
    return c0


def scaling_geometry(fam: VectorFamily) -> ScalingGeometry:
    best = None
    for i in range(ANGLES):
        t = 2 * math.pi * i / ANGLES
        w = (math.cos(t), math.sin(t))
        score = min(abs(float(v[0]) * w[0] + float(v[1]) * w[1]) for v in fam.vectors)
        if best is None or score > best[0]:
            best = (score, w)
    w1 = best[1]
    w2 = (-w1[1], w1[0])
    eps = 0.5
    for _ in range(60):
        cur, nxt = _c0(fam, w1, w2, eps), _c0(fam, w1, w2, eps / 2)
        if math.isfinite(cur) and abs(cur - nxt) <= 1e-3 * nxt:
            break
        eps /= 2
    return ScalingGeometry(w1, w2, eps, _c0(fam, w1, w2, eps))


def build_scaling_family(idx: IndexPoint, fam: VectorFamily, R: float,
                         geometry: Optional[ScalingGeometry] = None) -> FormInstance:
    """Indicators of the annuli R/c0 <= |t| <= R c0 in every slot."""
    if idx is not None and idx.n != fam.n:
        raise PreconditionError("index point and family have different N")
    g = geometry or scaling_geometry(fam)
    phi = PiecewisePowerFunction.indicator(R / g.c0, R * g.c0, fam.k)
    return FormInstance(fam, [phi] * fam.n)


# -- witness runners ---------------------------------------------------------


def _norm(f, ip, lam):
    if isinstance(f, PiecewisePowerFunction):
        return lorentz_norm(f, ip, ip, lam)
    return weighted_lp_norm(f, ip, lam)


def _form_point(inst, idx, R, seed, budget):
    res = evaluate_form(inst, seed, budget)
    norms = tuple(_norm(f, ip, lam) for f, (ip, lam) in zip(inst.functions, idx.entries))
    den = math.prod(norms)
    if res.value <= 0 or not math.isfinite(den) or den == 0:
        raise PreconditionError(
            f"degenerate evaluation at R = {R:g}: Lambda = {res.value}, norms = {norms}"
        )
    return DataPoint(R, res.value, norms, res.value / den), res


def _slack(verdict, tag, index) -> Fraction:
    for c in verdict.checks:
        if c.tag == tag and c.index == index:
            return c.slack
    raise KeyError((tag, index))


def predicted_slope(spec: WitnessSpec) -> Optional[Fraction]:
    """Growth exponent implied by the exact condition slacks."""
    kind = spec.kind
    if kind is WitnessKind.INTERPOLATION:
        return 1 - (1 + _as_fraction(spec.epsilon)) * sum(spec.idx.inv_p, Fraction(0))
    if kind is WitnessKind.BETA_IDENTITY:
        return 1 - _as_fraction(spec.lam2) - _as_fraction(spec.lam3)
    if kind is WitnessKind.SW2_BOUNDARY:
        return Fraction(0) if spec.mode is Sw2Mode.POSITIVE else None
    k = spec.fam.k
    if kind is WitnessKind.SCALING:
        return -k * scaling_slack(spec.idx, k)
    nec = check_necessary(spec.idx, spec.fam)
    if kind is WitnessKind.HYPER:
        return -k * _slack(nec, "hyper", spec.ell)
    return -_slack(nec, "index", spec.ell)


def _params(spec, default):
    lad = spec.ladder or default
    pred = predicted_slope(spec)
    direction = spec.direction
    if spec.kind is not WitnessKind.SCALING:
        # the slab and translated-set constructions need R large
        if direction == "zero":
            raise PreconditionError(f"{spec.kind.value} ladders must run toward infinity")
        direction = "inf"
    elif direction is None:
        direction = "zero" if pred is not None and pred < 0 else "inf"
    if direction == "zero":
        return tuple(sorted(1.0 / x for x in lad)), direction
    return tuple(lad), direction


def _finish(spec, points, direction, diagnostics=None, fit_on=None):
    params = [p.param for p in points]
    ratios = fit_on if fit_on is not None else [p.ratio for p in points]
    slope, rms, r2 = fit_slope(params, ratios)
    pred = predicted_slope(spec)
    sign = 1 if direction == "inf" else -1
    return WitnessReport(spec.kind, slope, pred, rms, r2,
                         decide(slope, r2, pred, sign, spec.tol),
                         direction, points, diagnostics or {})


def _run_scaling(spec):
    idx, fam = spec.idx, spec.fam
    Rs, direction = _params(spec, DEFAULT_LADDER)
    geo = scaling_geometry(fam)
    points, homog = [], 0.0
    base = [_norm(PiecewisePowerFunction.indicator(1 / geo.c0, geo.c0, fam.k), ip, lam)
            for ip, lam in idx.entries]
    lower = []
    for R in Rs:
        inst = build_scaling_family(idx, fam, R, geo)
        pt, _ = _form_point(inst, idx, R, spec.seed, spec.budget)
        points.append(pt)
        lower.append(pt.value / (R ** (2 * fam.k) * geo.set_measure(fam.k)))
        for n, n1, (ip, lam) in zip(pt.norms, base, idx.entries):
            law = n1 * R ** (fam.k * float(ip) + float(lam))
            homog = max(homog, abs(n - law) / law)
    diag = {"c0": geo.c0, "eps": geo.eps, "w1": geo.w1,
            "homogeneity_residual": homog, "min_lambda_over_RS": min(lower)}
    return _finish(spec, points, direction, diag)


def _perp_unit(v):
    x, y = float(v[0]), float(v[1])
    n = math.hypot(x, y)
    return (-y / n, x / n)


def _check_ell(spec):
    if spec.ell is None or not 1 <= spec.ell <= spec.fam.n:
        raise MalformedInputError(f"ell must be in 1..{spec.fam.n}")
    return spec.ell - 1


def _run_hyper(spec):
    idx, fam, k = spec.idx, spec.fam, spec.fam.k
    l = _check_ell(spec)
    Rs, direction = _params(spec, DEFAULT_LADDER)
    vl = fam.vectors[l]
    w = _perp_unit(vl)
    vl2 = float(vl[0]) ** 2 + float(vl[1]) ** 2
    r0 = min(Rs)
    c0 = 0.0
    for j, v in enumerate(fam.vectors):
        if j == l:
            continue
        a = abs(float(v[0] * vl[0] + v[1] * vl[1]))
        b = abs(float(v[0]) * w[0] + float(v[1]) * w[1])
        lo = b - 2 * a / r0
        if lo <= 0:
            raise PreconditionError(f"R = {r0:g} is too small for the slab construction")
        c0 = max(c0, 2 * b + 2 * a / r0, 1 / lo)
    points = []
    for R in Rs:
        funcs = [PiecewisePowerFunction.indicator(vl2, 2 * vl2, k) if j == l
                 else PiecewisePowerFunction.indicator(R / c0, R * c0, k)
                 for j in range(fam.n)]
        pt, _ = _form_point(FormInstance(fam, funcs), idx, R, spec.seed, spec.budget)
        points.append(pt)
    return _finish(spec, points, direction, {"c0": c0})


def _run_index(spec):
    idx, fam, k = spec.idx, spec.fam, spec.fam.k
    l = _check_ell(spec)
    Rs, direction = _params(spec, DEFAULT_LADDER)
    vl = fam.vectors[l]
    w = _perp_unit(vl)
    vl2 = float(vl[0]) ** 2 + float(vl[1]) ** 2
    coef = {}
    c0 = 0.0
    for j, v in enumerate(fam.vectors):
        if j == l:
            continue
        a = abs(float(v[0] * vl[0] + v[1] * vl[1]))
        b = float(v[0]) * w[0] + float(v[1]) * w[1]
        coef[j] = b
        c0 = max(c0, 2 * a + abs(b))
    y0 = np.zeros(k)
    y0[0] = 1.0
    points = []
    for R in Rs:
        funcs = [PiecewisePowerFunction.indicator(vl2, 2 * vl2, k) if j == l
                 else TranslatedBallIndicator(tuple(R * coef[j] * y0), c0)
                 for j in range(fam.n)]
        pt, _ = _form_point(FormInstance(fam, funcs), idx, R, spec.seed, spec.budget)
        points.append(pt)
    return _finish(spec, points, direction, {"c0": c0, "y0": tuple(float(t) for t in y0)})


def _run_interpolation(spec):
    """Partial sums S(M) = sum_{m <= M} m^-s, s = (1 + eps) sum 1/p_j.

    The growth exponent is read from the dyadic increments S(M) - S(M/2),
    which scale like M^(1 - s) without the additive constant that biases a
    direct fit of log S(M) at moderate M.
    """
    s = float((1 + _as_fraction(spec.epsilon)) * sum(spec.idx.inv_p, Fraction(0)))
    Ms = [int(round(x)) for x in (spec.ladder or INTERPOLATION_LADDER)]
    if any(M < 2 for M in Ms):
        raise MalformedInputError("interpolation ladder values must be at least 2")
    top = max(Ms)
    terms = np.arange(1, top + 1, dtype=float) ** (-s)
    csum = np.cumsum(terms)
    points, incs = [], []
    for M in Ms:
        inc = float(math.fsum(terms[M // 2:M]))
        points.append(DataPoint(float(M), float(csum[M - 1]), (), inc))
        incs.append(inc)
    return _finish(spec, points, "inf", {"s": s})


def _run_beta(spec):
    l2, l3 = float(_as_fraction(spec.lam2)), float(_as_fraction(spec.lam3))
    xs = spec.ladder or BETA_LADDER
    points = []
    for x in xs:
        F = riesz_composition(x, l2, l3)
        points.append(DataPoint(x, F, (), F))
    const = riesz_composition_constant(l2, l3)
    return _finish(spec, points, "inf", {"closed_form_constant": float(const)})


def run_witness(spec: WitnessSpec) -> WitnessReport:
    kind = spec.kind
    if kind in (WitnessKind.SCALING, WitnessKind.HYPER, WitnessKind.INDEX):
        if spec.idx is None or spec.fam is None:
            raise MalformedInputError(f"{kind.value} needs an index point and a family")
        if spec.idx.n != spec.fam.n:
            raise PreconditionError("index point and family have different N")
    if kind is WitnessKind.SCALING:
        return _run_scaling(spec)
    if kind is WitnessKind.HYPER:
        return _run_hyper(spec)
    if kind is WitnessKind.INDEX:
        return _run_index(spec)
    if kind is WitnessKind.INTERPOLATION:
        if spec.idx is None:
            raise MalformedInputError("INTERPOLATION needs an index point")
        return _run_interpolation(spec)
    if kind is WitnessKind.BETA_IDENTITY:
        return _run_beta(spec)
    return sw2_boundary_probe(spec.lam2, spec.mode or Sw2Mode.FAILING, spec.lam3,
                              spec.ladder, spec.tol)


# -- boundary examples for int f1(x) f2(x - y) f3(y) dx dy ---------------------


def _outer_integral(g, rho, alpha=0.0):
    """2 int_0^rho g(x) dx for g(x) ~ x^alpha at 0 (algebraic-weight QUADPACK)."""

    def smooth(x):
        # QAWS samples the endpoint itself; the smooth factor is continuous there
        x = max(x, rho * 1e-12)
        return g(x) * x ** (-alpha)

    with warnings.catch_warnings():
        # a nearly constant smooth part triggers harmless roundoff notices
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(smooth, 0.0, rho, weight="alg",
                                wvar=(alpha, 0.0), epsabs=0.0, epsrel=1e-9, limit=200)
    return 2.0 * val


def sw2_boundary_probe(lam2, mode, lam3=None, ladder=None,
                       tol: float = CONSISTENT_TOL) -> WitnessReport:
    """Concentrate f_1 at the origin at scales rho = 2^-L along a ladder of L.

    FAILING: exponents (1, 0, 0, lam2, 1 - lam2, 0) with f_2 = |t|^-lam2,
    f_3 = |y|^-(1 - lam2) on rho <= |y| < 1 and f_1 = rho^-1 on |x| < rho/2.
    POSITIVE: exponents (1, 1 - lam2 - lam3, 0, lam2, 0, lam3) with global
    powers f_2, f_3 and f_1 the indicator of |x| < rho; the ratio equals the
    Riesz composition constant at every scale.
    """
    mode = Sw2Mode(mode)
    l2 = _as_fraction(lam2)
    if not 0 < l2 < 1:
        raise MalformedInputError("lam2 must lie in (0, 1) for k = 1")
    Ls = tuple(float(x) for x in (ladder or SW2_LADDER))
    _check_ladder(Ls)
    f2 = PiecewisePowerFunction.power(-float(l2))
    points = []
    if mode is Sw2Mode.FAILING:
        spec = WitnessSpec(WitnessKind.SW2_BOUNDARY, lam2=l2, mode=mode, ladder=Ls, tol=tol)
        inv_p3 = 1 - l2
        for L in Ls:
            rho = 2.0 ** (-L)
            f1 = PiecewisePowerFunction.indicator(0, rho / 2, 1, 1 / rho)
            f3 = PiecewisePowerFunction.power(-float(inv_p3), rho, 1.0)

            def T(x, f3=f3):
                return integrate_product([Factor(f2, x, 1.0), Factor(f3, 0.0, -1.0)], 1e-10)

            lam_val = _outer_integral(T, rho / 2) / rho
            norms = (lorentz_norm(f1, 1, 1), lorentz_norm(f2, 0, 0, l2),
                     lorentz_norm(f3, inv_p3, inv_p3))
            points.append(DataPoint(L, lam_val, norms, lam_val / math.prod(norms)))
        return _finish(spec, points, "inf", {"exponents": "1,0,0,lam2,1-lam2,0"})
    if lam3 is None:
        raise MalformedInputError("POSITIVE mode needs lam3")
    l3 = _as_fraction(lam3)
    if not 0 < l3 < 1 or l2 + l3 <= 1:
        raise MalformedInputError("POSITIVE mode needs 0 < lam3 < 1 and lam2 + lam3 > 1")
    spec = WitnessSpec(WitnessKind.SW2_BOUNDARY, lam2=l2, lam3=l3, mode=mode, ladder=Ls, tol=tol)
    weight = 1 - l2 - l3
    for L in Ls:
        rho = 2.0 ** (-L)
        f1 = PiecewisePowerFunction.indicator(0, rho)
        lam_val = _outer_integral(lambda x: riesz_composition(x, float(l2), float(l3)), rho,
                                  float(weight))
        norms = (lorentz_norm(f1, 1, 1, weight), lorentz_norm(f2, 0, 0, l2),
                 lorentz_norm(PiecewisePowerFunction.power(-float(l3)), 0, 0, l3))
        points.append(DataPoint(L, lam_val, norms, lam_val / math.prod(norms)))
    const = riesz_composition_constant(float(l2), float(l3))
    return _finish(spec, points, "inf", {"closed_form_constant": float(const)})
