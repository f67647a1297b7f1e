import dataclasses
import random
from fractions import Fraction as F

import pytest

from blform.errors import DimensionMismatchError, PreconditionError
from blform.indices import IndexPoint, VectorFamily, check_sufficient
from blform.reduction import (
    Leaf,
    ReductionCertificate,
    Split,
    SubstitutionNode,
    certificate_with_exponents,
    classify_lorentz,
    derived_exponents,
    draw_pointwise_samples,
    index_slacks,
    reduce,
    verify_certificate,
    verify_pointwise,
)

from helpers import STANDARD, rand_q, random_family, random_sufficient


def _alphas(cert):
    return [tuple(leaf.alpha) for leaf in cert.leaves]


def test_nonnegative_lambda_is_a_single_leaf():
    cert = reduce([0, 0, 0], STANDARD)
    assert _alphas(cert) == [(0, 0, 0)]
    assert cert.leaves[0].constant == 1.0 and cert.depth == 0
    assert _alphas(reduce(["1/3", 2, 0], STANDARD)) == [(0, 0, 0)]


def test_hand_executed_split():
    cert = reduce([-1, 1, 1], STANDARD)
    assert _alphas(cert) == [(-1, 1, 0), (-1, 0, 1)]
    s = cert.root.split
    assert (s.j0, s.j1, s.j2, s.delta) == (0, 1, 2, 1)
    # v1 = -v2 + v3, so both branch factors are 2^1 * 1^1
    assert (s.c1, s.c2) == (-1, 1)
    assert [leaf.constant for leaf in cert.leaves] == [2.0, 2.0]


def test_four_slot_example():
    fam = VectorFamily([(1, 0), (0, 1), (1, 1), (1, 2)])
    cert = reduce([-1, 2, 2, -1], fam)
    assert len(cert.leaves) <= 4
    assert verify_certificate(cert).satisfied
    for leaf in cert.leaves:
        assert sum(leaf.alpha) == 0
        assert all(l - a >= 0 for l, a in zip(cert.source_lambda, leaf.alpha))


def test_overdrawn_slot_adds_leaves():
    # delta = 1 exceeds the residual 1/2 of slot 2, which turns negative and
    # is split again: four leaves from a single negative weight
    fam = VectorFamily([(1, 0), (0, 1), (1, 1), (1, 2)])
    cert = reduce([-1, "1/2", "1/2", 1], fam)
    assert len(cert.leaves) == 4 and cert.depth == 2
    assert verify_certificate(cert).satisfied


def test_reduce_rejects_index_failure():
    with pytest.raises(PreconditionError, match="l = 3"):
        reduce(["-1/4", "-1/4", "1/2"], STANDARD)
    with pytest.raises(DimensionMismatchError):
        reduce([0, 0], STANDARD)


def test_verify_catches_bad_leaf():
    lam = (F(-1), F(1), F(1))
    bad = ReductionCertificate(SubstitutionNode((F(1), F(-1), F(0))),
                               (Leaf((F(1), F(-1), F(0)), 1.0),), lam, STANDARD)
    v = verify_certificate(bad)
    assert not v.satisfied
    p1 = [c for c in v.violations if c.tag == "P" and c.index.endswith(":1")]
    assert p1 and p1[0].slack == -2


def test_hand_built_certificate_verifies():
    lam = (F(-1), F(1), F(1))
    zero = (F(0), F(0), F(0))
    beta = SubstitutionNode((F(-1), F(1), F(0)))
    gamma = SubstitutionNode((F(-1), F(0), F(1)))
    root = SubstitutionNode(zero, Split(0, 1, 2, F(1), F(-1), F(1), beta, gamma))
    leaves = (Leaf(beta.alpha, 2.0), Leaf(gamma.alpha, 2.0))
    cert = ReductionCertificate(root, leaves, lam, STANDARD)
    assert verify_certificate(cert).satisfied
    assert cert == reduce([-1, 1, 1], STANDARD)


def test_verify_catches_wrong_split_data():
    cert = reduce([-1, 1, 1], STANDARD)
    s = dataclasses.replace(cert.root.split, c1=F(1))
    broken = dataclasses.replace(cert, root=SubstitutionNode(cert.root.alpha, s))
    assert ("basis_combination", "r") in verify_certificate(broken).failed_tags()


def test_pointwise_trivial_and_split():
    triv = reduce([0, 0, 0], STANDARD)
    assert verify_pointwise(triv, draw_pointwise_samples(STANDARD, 100)) == 0.0
    cert = reduce([-1, 1, 1], STANDARD)
    assert verify_pointwise(cert, draw_pointwise_samples(STANDARD, 10**4, seed=1)) <= 1e-9


def _rescaled(cert, factor):
    return dataclasses.replace(
        cert, leaves=tuple(Leaf(l.alpha, l.constant * factor) for l in cert.leaves))


def test_pointwise_detects_shrunken_constant():
    cert = reduce([-1, 1, 1], STANDARD)
    x = draw_pointwise_samples(STANDARD, 10**4, seed=1)
    # 2^d (a^d + b^d) overshoots (a + b)^d by at least 2 for d = 1, so a
    # halved constant is still valid; a quartered one is not
    assert verify_pointwise(_rescaled(cert, 0.5), x) <= 1e-9
    assert verify_pointwise(_rescaled(cert, 0.25), x) > 0.4


def test_pointwise_oracle_direct_sum():
    # independent check of 1 <= sum_leaves C prod |v_j . x|^alpha_j
    cert = reduce([-1, 1, 1], STANDARD)
    x = draw_pointwise_samples(STANDARD, 2000, seed=4)
    d1, d2, d3 = abs(x[:, 0]), abs(x[:, 1]), abs(x[:, 0] + x[:, 1])
    total = 2 * d2 / d1 + 2 * d3 / d1
    assert (total >= 1 - 1e-12).all()


def test_derived_exponent_examples():
    idx = IndexPoint([("1/2", "1/6")] * 3)
    q, flags = derived_exponents(idx, (0, 0, 0), 1)
    assert q == (F(2, 3),) * 3 and all(flags.values())
    with pytest.raises(PreconditionError):
        derived_exponents(IndexPoint([("1/2", -1), ("1/2", 1), ("1/2", 1)]), (0, 0, 0), 1)
    with pytest.raises(PreconditionError):
        derived_exponents(IndexPoint([("1/3", -1), ("1/3", "3/2"), ("1/3", "3/2")]), (-1, 1, 0), 1)


def test_derived_exponents_on_reduced_leaves():
    idx = IndexPoint([("2/3", "-1/6"), ("1/3", "1/3"), ("1/2", "1/3")])
    assert check_sufficient(idx, STANDARD).satisfied
    cert = certificate_with_exponents(reduce(idx.lam, STANDARD), idx)
    for leaf in cert.leaves:
        assert sum(leaf.q_exponents) == 2
        assert all(0 < q < 1 for q in leaf.q_exponents)
    # leaves (-1/6, 1/6, 0) and (-1/6, 0, 1/6); 1/q = 1/p + lambda - alpha
    assert [l.q_exponents for l in cert.leaves] == [(F(2, 3), F(1, 2), F(5, 6)),
                                                    (F(2, 3), F(2, 3), F(2, 3))]


def test_lorentz_examples():
    ok = IndexPoint([("1/2", "1/6")] * 3, lorentz=["1/2"] * 3)
    assert classify_lorentz(ok, STANDARD).satisfied
    low = IndexPoint([("1/2", "1/6")] * 3, lorentz=["1/4"] * 3)
    v = classify_lorentz(low, STANDARD)
    assert v.failed_tags() == {("interpolation", "global")}
    with pytest.raises(PreconditionError):
        classify_lorentz(IndexPoint([("1/2", "1/6")] * 3), STANDARD)


def test_lorentz_with_r_equal_p_recovers_sufficient():
    rng = random.Random(2)
    for _ in range(500):
        n = rng.randint(2, 5)
        entries = [(F(rng.randint(0, 12), 12), F(rng.randint(-12, 12), 12)) for _ in range(n)]
        idx = IndexPoint(entries, lorentz=[e[0] for e in entries])
        fam = random_family(rng, n)
        assert classify_lorentz(idx, fam).satisfied == check_sufficient(idx, fam).satisfied


def test_random_round_trip_small():
    rng = random.Random(11)
    done = 0
    while done < 300:
        n = rng.randint(2, 6)
        lam = [rand_q(rng, -2, 2, 60) for _ in range(n)]
        if min(index_slacks(lam)) < 0:
            continue
        fam = random_family(rng, n, den=60)
        cert = reduce(lam, fam)
        assert verify_certificate(cert).satisfied
        supp = sum(1 for x in lam if x != 0)
        assert cert.depth <= supp and len(cert.leaves) <= 2 ** supp
        done += 1


def test_reduce_is_deterministic():
    rng = random.Random(5)
    idx = random_sufficient(rng, 5)
    fam = random_family(rng, 5)
    assert reduce(idx.lam, fam) == reduce(idx.lam, fam)
