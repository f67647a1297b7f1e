import random
from fractions import Fraction as F

import pytest
from shapely.geometry import Polygon, box
from shapely.ops import unary_union

from blform.errors import DimensionMismatchError, UnboundedSupportError
from blform.forms import (
    FormInstance,
    Method,
    evaluate_form,
    evaluate_form_exact,
    evaluate_form_mc,
)
from blform.functions import PiecewisePowerFunction as PPF
from blform.functions import TensorProductFunction, TranslatedBallIndicator
from blform.indices import VectorFamily

from helpers import STANDARD, random_family

UNIT = PPF.indicator(0, 1)


def _strip(v, lo, hi, bound):
    """{x in box : lo <= v . x <= hi} as a shapely polygon."""
    a, b = float(v[0]), float(v[1])
    big = box(-bound, -bound, bound, bound)
    corners = [(-bound, -bound), (bound, -bound), (bound, bound), (-bound, bound)]

    def half(sign, level):
        # keep sign * (v . x - level) <= 0 via a large polygon clip
        pts = [p for p in corners if sign * (a * p[0] + b * p[1] - level) <= 0]
        edge = []
        for p, q in zip(corners, corners[1:] + corners[:1]):
            fp = sign * (a * p[0] + b * p[1] - level)
            fq = sign * (a * q[0] + b * q[1] - level)
            if fp * fq < 0:
                t = fp / (fp - fq)
                edge.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        allp = pts + edge
        if len(allp) < 3:
            return Polygon()
        return Polygon(allp).convex_hull

    return half(1, hi).intersection(half(-1, lo)).intersection(big)


def _shapely_value(fam, annuli, bound=50.0):
    """Area of the intersection of the sets {|v_j . x| in [a_j, b_j)}."""
    region = box(-bound, -bound, bound, bound)
    for v, (a, b) in zip(fam.vectors, annuli):
        parts = [_strip(v, a, b, bound), _strip(v, -b, -a, bound)]
        region = region.intersection(unary_union(parts))
    return region.area


def test_area_three_instance():
    res = evaluate_form_exact(FormInstance(STANDARD, [UNIT] * 3))
    assert res.exact == 3 and res.method is Method.EXACT_POLYGON and res.error_bound == 0


def test_separable_pair_and_zero():
    fam = VectorFamily([(1, 0), (0, 1)])
    assert evaluate_form_exact(FormInstance(fam, [UNIT, UNIT])).exact == 4
    assert evaluate_form_exact(FormInstance(STANDARD, [UNIT, PPF.zero(), UNIT])).exact == 0


def test_exact_matches_shapely_oracle():
    rng = random.Random(3)
    for _ in range(40):
        n = rng.randint(2, 4)
        fam = random_family(rng, n, den=2, box=2)
        annuli = []
        for _ in range(n):
            a = F(rng.randint(0, 3), 4)
            annuli.append((a, a + F(rng.randint(1, 8), 4)))
        funcs = [PPF.indicator(a, b) for a, b in annuli]
        got = evaluate_form_exact(FormInstance(fam, funcs)).value
        assert got == pytest.approx(_shapely_value(fam, annuli, bound=400.0), rel=1e-9, abs=1e-12)


def test_weighted_indicator_sums():
    f = PPF(1, [(0, 1, 2, 0), (1, 2, 1, 0)])
    # g = 2 on [0,1) + 1 on [1,2) = 1_{[0,2)} + 1_{[0,1)}, so Lambda is additive
    fam = VectorFamily([(1, 0), (0, 1)])
    assert evaluate_form_exact(FormInstance(fam, [f, UNIT])).exact == (4 + 2) * 2


def test_mc_agrees_with_exact_on_area_three():
    res = evaluate_form_mc(FormInstance(STANDARD, [UNIT] * 3), seed=0, budget=10**6)
    assert abs(res.value - 3) <= 3 * res.error_bound
    assert res.sample_count <= 10**6 and res.seed == 0


def test_mc_zero_function():
    res = evaluate_form_mc(FormInstance(STANDARD, [UNIT, PPF.zero(), UNIT]))
    assert res.value == 0 and res.error_bound == 0


def test_tensor_square_matches_squared_value():
    fam2 = STANDARD.with_k(2)
    sq = TensorProductFunction(UNIT, 2)
    res = evaluate_form_mc(FormInstance(fam2, [sq] * 3), seed=1, budget=4 * 10**5)
    assert abs(res.value - 9) <= 3 * res.error_bound


def test_mc_is_independent_of_worker_count(monkeypatch):
    inst = FormInstance(STANDARD, [UNIT, PPF.indicator(0, 2), PPF.power(-0.5, 0, 3)])
    monkeypatch.setenv("BLFORM_THREADS", "1")
    a = evaluate_form_mc(inst, seed=7, budget=10**5)
    monkeypatch.setenv("BLFORM_THREADS", "4")
    b = evaluate_form_mc(inst, seed=7, budget=10**5)
    assert a == b


def test_dispatch_and_errors():
    inst = FormInstance(STANDARD, [UNIT, UNIT, PPF.power(-0.5, 0, 1)])
    assert evaluate_form(inst, budget=10**5).method is Method.MONTE_CARLO
    assert evaluate_form(FormInstance(STANDARD, [UNIT] * 3)).method is Method.EXACT_POLYGON
    with pytest.raises(UnboundedSupportError):
        evaluate_form_exact(FormInstance(STANDARD, [UNIT, PPF.indicator(1, float("inf")),
                                                    PPF.indicator(1, float("inf"))]))
    with pytest.raises(DimensionMismatchError):
        FormInstance(STANDARD, [UNIT, UNIT])
    with pytest.raises(DimensionMismatchError):
        FormInstance(STANDARD, [UNIT, UNIT, TranslatedBallIndicator((0.0, 0.0), 1.0)])


def test_translated_balls_in_two_dimensions():
    fam = VectorFamily([(1, 0), (0, 1)], k=2)
    disk = TranslatedBallIndicator((2.0, 0.0), 1.0)
    res = evaluate_form_mc(FormInstance(fam, [disk, disk]), seed=0, budget=4 * 10**5)
    assert abs(res.value - 3.141592653589793 ** 2) <= 3 * res.error_bound
