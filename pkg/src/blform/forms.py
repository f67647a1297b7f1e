"""Evaluation of the form Lambda(f_1..f_N) = int_{R^2k} prod_j f_j(v_j . x) dx.

Two paths.  For k = 1 and indicator inputs the integrand is a finite sum of
indicators of convex polygons, so the value is an exact rational area sum.
Everything else goes through stratified Monte Carlo in the coordinates
(u, w) = (v_i . x, v_j . x) of two boundedly supported slots.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import stats

from .errors import DimensionMismatchError, PreconditionError, UnboundedSupportError
from .indices import VectorFamily, det2

MC_BATCHES = 32
MC_STRATA = 32
CONFIDENCE = 0.99
ROUNDOFF = 64 * np.finfo(float).eps


class Method(str, enum.Enum):
    EXACT_POLYGON = "EXACT_POLYGON"
    MONTE_CARLO = "MONTE_CARLO"


@dataclass(frozen=True)
class FormInstance:
    fam: VectorFamily
    functions: tuple

    def __init__(self, fam: VectorFamily, functions):
        functions = tuple(functions)
        if len(functions) != fam.n:
            raise DimensionMismatchError(
                f"{len(functions)} functions for a family of {fam.n} vectors"
            )
        for j, f in enumerate(functions):
            if f.k != fam.k:
                raise DimensionMismatchError(
                    f"function {j + 1} lives on R^{f.k} but the family has k = {fam.k}"
                )
        object.__setattr__(self, "fam", fam)
        object.__setattr__(self, "functions", functions)


@dataclass(frozen=True)
class EvalResult:
    value: float
    error_bound: float
    method: Method
    seed: Optional[int] = None
    sample_count: int = 0
    exact: Optional[Fraction] = None


# -- exact polygon path ------------------------------------------------------


def _clip(poly, a, b):
    """Sutherland-Hodgman step: keep the part of poly with a . x <= b."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a[0] * p[0] + a[1] * p[1] - b
        fq = a[0] * q[0] + a[1] * q[1] - b
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _area(poly) -> Fraction:
    if len(poly) < 3:
        return Fraction(0)
    s = Fraction(0)
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        s += x0 * y1 - x1 * y0
    return abs(s) / 2


def _parallelogram(vi, vj, lo_i, hi_i, lo_j, hi_j):
    """Vertices of {lo_i <= vi.x <= hi_i, lo_j <= vj.x <= hi_j}."""
    d = det2(vi, vj)

    def solve(s, t):
        return ((s * vj[1] - t * vi[1]) / d, (vi[0] * t - vj[0] * s) / d)

    return [solve(lo_i, lo_j), solve(hi_i, lo_j), solve(hi_i, hi_j), solve(lo_i, hi_j)]


def _strip_area(fam: VectorFamily, choice, anchors) -> Fraction:
    i, j = anchors
    (lo_i, hi_i, _), (lo_j, hi_j, _) = choice[i], choice[j]
    vecs = fam.vectors
    poly = _parallelogram(vecs[i], vecs[j], lo_i, hi_i, lo_j, hi_j)
    for m, (lo, hi, _) in enumerate(choice):
        if m in anchors:
            continue
        v = vecs[m]
        if hi is not None:
            poly = _clip(poly, v, hi)
        if lo is not None and poly:
            poly = _clip(poly, (-v[0], -v[1]), -lo)
        if not poly:
            return Fraction(0)
    return _area(poly)


def evaluate_form_exact(inst: FormInstance) -> EvalResult:
    """Exact value for k = 1 indicator-type inputs, as a rational area sum."""
    if inst.fam.k != 1:
        raise PreconditionError("the polygon path needs k = 1; use evaluate_form_mc")
    parts = []
    for j, f in enumerate(inst.functions):
        iv = f.intervals_1d()
        if iv is None:
            raise PreconditionError(
                f"function {j + 1} is not a sum of indicators; use evaluate_form_mc"
            )
        parts.append(iv)
    if any(not p for p in parts):
        return EvalResult(0.0, 0.0, Method.EXACT_POLYGON, exact=Fraction(0))
    bounded = [j for j, p in enumerate(parts)
               if all(lo is not None and hi is not None for lo, hi, _ in p)]
    if len(bounded) < 2:
        raise UnboundedSupportError(
            "at least two functions need bounded support; truncate the inputs"
        )
    anchors = (bounded[0], bounded[1])
    total = Fraction(0)
    for choice in itertools.product(*parts):
        weight = math.prod(c for _, _, c in choice)
        if weight == 0:
            continue
        total += weight * _strip_area(inst.fam, choice, anchors)
    return EvalResult(float(total), 0.0, Method.EXACT_POLYGON, exact=total)


# -- Monte Carlo path --------------------------------------------------------


def _workers() -> int:
    raw = os.environ.get("BLFORM_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _pick_anchors(inst: FormInstance):
    """Two boundedly supported slots minimising the sampled volume in x."""
    fam, k = inst.fam, inst.fam.k
    boxes = {}
    for j, f in enumerate(inst.functions):
        b = f.coordinate_bounds()
        if b is not None:
            boxes[j] = (np.asarray(b[0], float), np.asarray(b[1], float))
    if len(boxes) < 2:
        raise UnboundedSupportError(
            "Monte Carlo needs two functions with bounded support; truncate the inputs"
        )
    best = None
    for i, j in itertools.combinations(sorted(boxes), 2):
        vol = float(np.prod(boxes[i][1] - boxes[i][0]) * np.prod(boxes[j][1] - boxes[j][0]))
        vol /= abs(float(det2(fam.vectors[i], fam.vectors[j]))) ** k
        if best is None or vol < best[0]:
            best = (vol, i, j)
    _, i, j = best
    return i, j, boxes[i], boxes[j]


def _batch_estimate(inst, anchors, coeffs, lo, width, strata, per, seq):
    """One stratified estimate of the box mean of the transformed integrand."""
    i, j = anchors
    k = inst.fam.k
    dim = 2 * k
    rng = np.random.default_rng(seq)
    cells = np.array(list(itertools.product(range(strata), repeat=dim)), dtype=float)
    cells = np.repeat(cells, per, axis=0)
    z = (cells + rng.random(cells.shape)) / strata
    pts = lo + z * width
    u, w = pts[:, :k], pts[:, k:]
    vals = np.ones(len(pts))
    for m, f in enumerate(inst.functions):
        if m == i:
            arg = u
        elif m == j:
            arg = w
        else:
            c1, c2 = coeffs[m]
            arg = c1 * u + c2 * w
        vals *= f.evaluate(arg)
        if not vals.any():
            break
    return float(vals.mean())


def evaluate_form_mc(inst: FormInstance, seed: int = 0, budget: int = 10**6) -> EvalResult:
    """Stratified Monte Carlo with a batch-means 99% confidence half-width.

    The budget is split into 32 independent batches; each batch places the
    same number of jittered points in every cell of a regular grid over the
    (u, w) box (at most 32 cells per axis).  The result depends only on
    (inst, seed, budget), never on the worker count.
    """
    if any(f.is_zero() for f in inst.functions):
        return EvalResult(0.0, 0.0, Method.MONTE_CARLO, seed, 0)
    if budget < 2 * MC_BATCHES:
        raise PreconditionError(f"budget {budget} is below the minimum {2 * MC_BATCHES}")
    fam, k = inst.fam, inst.fam.k
    i, j, box_i, box_j = _pick_anchors(inst)
    coeffs = {m: tuple(float(c) for c in fam.solve(m, i, j))
              for m in range(fam.n) if m not in (i, j)}
    lo = np.concatenate([box_i[0], box_j[0]])
    width = np.concatenate([box_i[1] - box_i[0], box_j[1] - box_j[0]])
    dim = 2 * k
    per_batch = budget // MC_BATCHES
    strata = max(1, min(MC_STRATA, int(per_batch ** (1.0 / dim))))
    while strata > 1 and strata ** dim > per_batch:
        strata -= 1
    per = per_batch // strata ** dim
    jac = float(np.prod(width)) / abs(float(det2(fam.vectors[i], fam.vectors[j]))) ** k
    seqs = np.random.SeedSequence(seed).spawn(MC_BATCHES)

    def run(s):
        return _batch_estimate(inst, (i, j), coeffs, lo, width, strata, per, s)

    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            means = list(pool.map(run, seqs))
    else:
        means = [run(s) for s in seqs]
    est = np.array(means) * jac
    value = float(est.mean())
    sd = float(est.std(ddof=1))
    tq = float(stats.t.ppf(0.5 + CONFIDENCE / 2, MC_BATCHES - 1))
    half = tq * sd / math.sqrt(MC_BATCHES)
    # identical batch means (integrand constant on the box) still carry the
    # rounding of the sums and the Jacobian
    half = max(half, ROUNDOFF * abs(value))
    count = MC_BATCHES * per * strata ** dim
    return EvalResult(max(value, 0.0), half, Method.MONTE_CARLO, seed, count)


def evaluate_form(inst: FormInstance, seed: int = 0, budget: int = 10**6) -> EvalResult:
    """Exact path when it applies, Monte Carlo otherwise."""
    if inst.fam.k == 1 and all(f.intervals_1d() is not None for f in inst.functions):
        return evaluate_form_exact(inst)
    return evaluate_form_mc(inst, seed, budget)
