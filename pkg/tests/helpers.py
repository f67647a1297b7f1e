"""Seeded generators and the property checks shared by the unit tests and
the acceptance suite."""

from __future__ import annotations

import math
import random
from fractions import Fraction

from blform.errors import MalformedInputError
from blform.functions import Piece, PiecewisePowerFunction
from blform.indices import (
    Classification,
    IndexPoint,
    VectorFamily,
    check_necessary,
    check_subspace_condition,
    check_sufficient,
    classify,
    segment_midpoint,
)
from blform.norms import lorentz_norm

STANDARD = VectorFamily([(1, 0), (0, 1), (1, 1)])


def rand_q(rng, lo, hi, den):
    d = rng.randint(1, den)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_family(rng, n, den=6, box=3, k=1):
    while True:
        vecs = [(rand_q(rng, -box, box, den), rand_q(rng, -box, box, den)) for _ in range(n)]
        try:
            return VectorFamily(vecs, k)
        except MalformedInputError:
            continue


def random_index(rng, n, den=12, k=1, on_scaling=True):
    """Random point; with on_scaling the last weight is solved so that the
    scaling equation holds (when that keeps it in [-2, 2])."""
    inv_p = [Fraction(rng.randint(0, den), den) for _ in range(n)]
    lam = [Fraction(rng.randint(-den, den), den) for _ in range(n)]
    if on_scaling:
        rest = sum(ip + l / k for ip, l in zip(inv_p[:-1], lam[:-1]))
        lam[-1] = k * (2 - rest - inv_p[-1])
    return IndexPoint(list(zip(inv_p, lam)))


def random_sufficient(rng, n, k=1, den=24, max_tries=10**4):
    """Sufficient point built around the barycentre: per-slot terms
    1/p_j + lambda_j/k near 2/n, weights near 0, then filtered."""
    fam = STANDARD_FOR[n].with_k(k)
    for _ in range(max_tries):
        terms = [Fraction(2, n)] * n
        for _ in range(n):
            i, j = rng.sample(range(n), 2)
            d = Fraction(rng.randint(0, den // 4), den)
            terms[i] += d
            terms[j] -= d
        lam = [Fraction(rng.randint(-den // 4, den // 4), den) * k for _ in range(n)]
        inv_p = [t - l / k for t, l in zip(terms, lam)]
        if not all(0 <= ip <= 1 for ip in inv_p):
            continue
        idx = IndexPoint(list(zip(inv_p, lam)))
        if check_sufficient(idx, fam).satisfied:
            return idx
    raise RuntimeError("no sufficient point found")


def _fixed_family(n):
    vecs = [(1, 0), (0, 1)] + [(1, m) for m in range(1, n - 1)]
    return VectorFamily(vecs)


STANDARD_FOR = {n: _fixed_family(n) for n in range(2, 8)}


def farey(den):
    return sorted({Fraction(a, d) for d in range(1, den + 1) for a in range(d + 1)})


def random_radial(rng, k=1, pieces=3, allow_origin_power=True):
    """Random piecewise power with bounded support and finite L^p norms."""
    edges = sorted({Fraction(rng.randint(1, 40), 8) for _ in range(pieces)})
    bounds = [0.0] + [float(e) for e in edges]
    out = []
    for a, b in zip(bounds, bounds[1:]):
        c = rng.choice([0.5, 1.0, 2.0, 3.0])
        if a == 0 and allow_origin_power:
            gamma = -rng.choice([0.0, 0.125, 0.25]) * k
        else:
            gamma = rng.choice([-1.0, -0.5, 0.0, 0.5, 1.0])
        out.append(Piece(a, b, c, gamma))
    return PiecewisePowerFunction(k, out)


# -- property checks (each returns a count so callers can assert coverage) --


def prop_sufficient_implies_necessary(count=10**4, seed=0):
    rng = random.Random(seed)
    for i in range(count):
        n = rng.randint(2, 6)
        k = rng.randint(1, 3)
        idx = random_index(rng, n, rng.choice([2, 3, 4, 6, 12]), k, on_scaling=rng.random() < 0.8)
        fam = STANDARD_FOR[n].with_k(k)
        if check_sufficient(idx, fam).satisfied:
            assert check_necessary(idx, fam).satisfied, idx
            assert classify(idx, fam) is Classification.SUFFICIENT
    return count


def prop_convexity(pairs=500, seed=0):
    rng = random.Random(seed)
    for _ in range(pairs):
        n = rng.randint(3, 5)
        k = rng.randint(1, 2)
        fam = STANDARD_FOR[n].with_k(k)
        a = random_sufficient(rng, n, k)
        b = random_sufficient(rng, n, k)
        for t in (Fraction(1, 2), Fraction(rng.randint(1, 11), 12)):
            mid = segment_midpoint(a, b, t)
            assert classify(mid, fam) is Classification.SUFFICIENT, (a, b, t)
    return pairs


def _equivalence_on(fam, points):
    checked = 0
    for inv_p in points:
        idx = IndexPoint([(p, 0) for p in inv_p])
        nec = check_necessary(idx, fam)
        want = all(c.ok for c in nec.checks if c.tag in ("scaling", "hyper"))
        assert check_subspace_condition(inv_p, fam).satisfied == want, inv_p
        checked += 1
    return checked


def prop_subspace_equivalence(den=12):
    """Exhaustive over the scaling hyperplane: Farey grid for N = 2, 3 and
    the 1/den grid for N = 4."""
    grid = farey(den)
    total = 0
    for n in (2, 3):
        fam = STANDARD_FOR[n]
        pts = []
        if n == 2:
            pts = [(a, 2 - a) for a in grid if 2 - a in grid]
        else:
            gs = set(grid)
            pts = [(a, b, 2 - a - b) for a in grid for b in grid if 2 - a - b in gs]
        total += _equivalence_on(fam, pts)
    step = [Fraction(i, den) for i in range(den + 1)]
    ss = set(step)
    pts = [(a, b, c, 2 - a - b - c) for a in step for b in step for c in step
           if 2 - a - b - c in ss]
    total += _equivalence_on(STANDARD_FOR[4], pts)
    return total


def prop_dilation_homogeneity(count=200, seed=0):
    rng = random.Random(seed)
    exps = [(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 3), Fraction(1, 3)),
            (Fraction(1, 2), Fraction(0)), (Fraction(1, 4), Fraction(0)),
            (Fraction(1, 2), Fraction(1, 3)), (Fraction(1, 3), Fraction(3, 4))]
    for _ in range(count):
        k = rng.randint(1, 3)
        f = random_radial(rng, k)
        inv_p, inv_r = rng.choice(exps)
        lam = Fraction(rng.randint(0, 4), 8)
        R = rng.choice([0.25, 0.5, 2.0, 3.0, 10.0])
        base = lorentz_norm(f, inv_p, inv_r, lam)
        scaled = lorentz_norm(f.dilate(R), inv_p, inv_r, lam)
        expect = R ** (k * float(inv_p) + float(lam)) * base
        closed = inv_p == inv_r or inv_r == 0
        assert math.isclose(scaled, expect, rel_tol=1e-9 if closed else 1e-6), (f, inv_p, inv_r, lam, R)
    return count
