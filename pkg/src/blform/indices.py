"""Exact index vectors, vector families and the boundedness condition systems.

Everything here runs on :class:`fractions.Fraction`; there is no floating
point anywhere in this module.  Condition records use 1-based indices
``ell = 1..N`` to line up with the usual mathematical labelling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import DimensionMismatchError, MalformedInputError
from .rational import fmt, to_rational

GLOBAL = "global"

ZERO = Fraction(0)
ONE = Fraction(1)
TWO = Fraction(2)


def det2(u, v) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class VectorFamily:
    """N nonzero vectors in R^2, pairwise linearly independent, plus the
    tensor power ``k`` (the form integrates over R^{2k})."""

    vectors: tuple
    k: int = 1

    def __init__(self, vectors, k=1):
        vecs = []
        for i, v in enumerate(vectors):
            if len(v) != 2:
                raise MalformedInputError(f"vector {i + 1} must have 2 components")
            vecs.append((to_rational(v[0]), to_rational(v[1])))
        object.__setattr__(self, "vectors", tuple(vecs))
        if isinstance(k, bool) or int(k) != k or int(k) < 1:
            raise MalformedInputError(f"k must be a positive integer, got {k!r}")
        object.__setattr__(self, "k", int(k))
        if len(vecs) < 2:
            raise MalformedInputError("a vector family needs at least two vectors")
        for i, v in enumerate(vecs):
            if v == (0, 0):
                raise MalformedInputError(f"vector {i + 1} is zero")
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                if det2(vecs[i], vecs[j]) == 0:
                    raise MalformedInputError(
                        f"vectors {i + 1} and {j + 1} are parallel; "
                        "every pair must be a basis of R^2"
                    )

    @property
    def n(self) -> int:
        return len(self.vectors)

    def with_k(self, k: int) -> "VectorFamily":
        return VectorFamily(self.vectors, k)

    def solve(self, j0: int, j1: int, j2: int):
        """Exact (c1, c2) with v_j0 = c1 v_j1 + c2 v_j2 (0-based indices)."""
        a, b, t = self.vectors[j1], self.vectors[j2], self.vectors[j0]
        d = det2(a, b)
        return det2(t, b) / d, det2(a, t) / d


@dataclass(frozen=True)
class IndexPoint:
    """Exponents (1/p_j, lambda_j), optionally with Lorentz exponents 1/r_j."""

    entries: tuple
    lorentz: Optional[tuple] = None

    def __init__(self, entries, lorentz=None):
        ents = []
        for j, pair in enumerate(entries):
            if len(pair) != 2:
                raise MalformedInputError(f"entry {j + 1} must be a pair (1/p, lambda)")
            inv_p, lam = to_rational(pair[0]), to_rational(pair[1])
            if not 0 <= inv_p <= 1:
                raise MalformedInputError(f"1/p_{j + 1} = {fmt(inv_p)} is outside [0, 1]")
            ents.append((inv_p, lam))
        object.__setattr__(self, "entries", tuple(ents))
        if lorentz is not None:
            lor = tuple(to_rational(r) for r in lorentz)
            if len(lor) != len(ents):
                raise DimensionMismatchError(
                    f"{len(lor)} Lorentz exponents for {len(ents)} entries"
                )
            for j, r in enumerate(lor):
                if not 0 <= r <= 1:
                    raise MalformedInputError(f"1/r_{j + 1} = {fmt(r)} is outside [0, 1]")
            lorentz = lor
        object.__setattr__(self, "lorentz", lorentz)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def inv_p(self):
        return tuple(e[0] for e in self.entries)

    @property
    def lam(self):
        return tuple(e[1] for e in self.entries)


@dataclass(frozen=True)
class ConditionRecord:
    tag: str
    index: Union[int, str]
    slack: Fraction
    ok: bool

    def to_json(self):
        return {"tag": self.tag, "index": self.index, "slack": fmt(self.slack), "ok": self.ok}


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of one condition system.  ``checks`` lists every inequality
    that was evaluated; ``violations`` is the failing subset."""

    name: str
    checks: tuple = field(default_factory=tuple)

    @property
    def violations(self):
        return tuple(c for c in self.checks if not c.ok)

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def failed_tags(self):
        return {(c.tag, c.index) for c in self.violations}

    def to_json(self):
        return {
            "name": self.name,
            "satisfied": self.satisfied,
            "violations": [c.to_json() for c in self.violations],
            "checks": [c.to_json() for c in self.checks],
        }


class Classification(str, enum.Enum):
    SUFFICIENT = "SUFFICIENT"
    NECESSARY_FAIL = "NECESSARY_FAIL"
    BOUNDARY = "BOUNDARY"


def _require_compatible(idx: IndexPoint, fam: VectorFamily):
    if idx.n != fam.n:
        raise DimensionMismatchError(
            f"index point has {idx.n} entries but the family has {fam.n} vectors"
        )


class _Checks:
    """Small accumulator so each condition is one line at the call site."""

    def __init__(self):
        self.items = []

    def eq(self, tag, index, lhs, rhs):
        s = lhs - rhs
        self.items.append(ConditionRecord(tag, index, s, s == 0))

    def ge(self, tag, index, lhs, rhs):
        s = lhs - rhs
        self.items.append(ConditionRecord(tag, index, s, s >= 0))

    def gt(self, tag, index, lhs, rhs):
        s = lhs - rhs
        self.items.append(ConditionRecord(tag, index, s, s > 0))

    def lt(self, tag, index, lhs, rhs):
        s = lhs - rhs
        self.items.append(ConditionRecord(tag, index, s, s < 0))

    def open_unit(self, tag, index, x):
        # slack is the distance to the nearer endpoint; positive iff x in (0, 1)
        s = min(x, 1 - x)
        self.items.append(ConditionRecord(tag, index, s, s > 0))

    def verdict(self, name):
        return ConditionVerdict(name, tuple(self.items))


def weighted_terms(idx: IndexPoint, k: int):
    """The per-slot quantities 1/p_j + lambda_j / k."""
    return [ip + lam / k for ip, lam in idx.entries]


def scaling_slack(idx: IndexPoint, k: int) -> Fraction:
    return sum(weighted_terms(idx, k), ZERO) - TWO


def _common(c: _Checks, idx: IndexPoint, k: int, strict_hyper: bool):
    terms = weighted_terms(idx, k)
    total = sum(terms, ZERO)
    lam_total = sum(idx.lam, ZERO)
    c.eq("scaling", GLOBAL, total, TWO)
    for ell in range(idx.n):
        rest = total - terms[ell]
        if strict_hyper:
            c.gt("hyper_strict", ell + 1, rest, ONE)
        else:
            c.ge("hyper", ell + 1, rest, ONE)
    for ell in range(idx.n):
        c.ge("index", ell + 1, lam_total - idx.lam[ell], ZERO)


def sufficient_for_k(idx: IndexPoint, k: int) -> ConditionVerdict:
    """The sufficient conditions depend on the family only through k."""
    c = _Checks()
    for j, ip in enumerate(idx.inv_p):
        c.open_unit("open_interval", j + 1, ip)
    _common(c, idx, k, strict_hyper=True)
    c.ge("interpolation", GLOBAL, sum(idx.inv_p, ZERO), ONE)
    return c.verdict("sufficient")


def check_sufficient(idx: IndexPoint, fam: VectorFamily) -> ConditionVerdict:
    """Sufficient conditions for boundedness of the form in weighted L^p."""
    _require_compatible(idx, fam)
    return sufficient_for_k(idx, fam.k)


def check_necessary(idx: IndexPoint, fam: VectorFamily) -> ConditionVerdict:
    """Necessary conditions; a failure means the estimate cannot hold."""
    _require_compatible(idx, fam)
    c = _Checks()
    _common(c, idx, fam.k, strict_hyper=False)
    c.ge("interpolation", GLOBAL, sum(idx.inv_p, ZERO), ONE)
    return c.verdict("necessary")


def classify(idx: IndexPoint, fam: VectorFamily) -> Classification:
    if check_sufficient(idx, fam).satisfied:
        return Classification.SUFFICIENT
    if not check_necessary(idx, fam).satisfied:
        return Classification.NECESSARY_FAIL
    return Classification.BOUNDARY


def check_subspace_condition(inv_ps: Sequence, fam: VectorFamily) -> ConditionVerdict:
    """Unweighted subspace criterion sum_j dim(v_j V)/p_j >= dim V.

    With every pair of vectors a basis, the only lines that matter are the
    N kernels span(v_l^perp), where dim(v_l V) = 0 and every other dim is
    1, and a generic line where all dims are 1.  V = R^2 is an equality
    (the scaling condition with all weights zero).
    """
    inv_ps = [to_rational(x) for x in inv_ps]
    if len(inv_ps) != fam.n:
        raise DimensionMismatchError(f"{len(inv_ps)} exponents for {fam.n} vectors")
    c = _Checks()
    total = sum(inv_ps, ZERO)
    c.eq("scaling", GLOBAL, total, TWO)
    c.ge("subspace", "generic", total, ONE)
    for ell in range(fam.n):
        c.ge("subspace", ell + 1, total - inv_ps[ell], ONE)
    return c.verdict("subspace")


def segment_midpoint(idx_a: IndexPoint, idx_b: IndexPoint, t) -> IndexPoint:
    """Entrywise (1 - t) A + t B."""
    t = to_rational(t)
    if not 0 <= t <= 1:
        raise MalformedInputError(f"t = {fmt(t)} is outside [0, 1]")
    if idx_a.n != idx_b.n:
        raise DimensionMismatchError("index points have different lengths")
    s = 1 - t
    entries = [
        (s * pa + t * pb, s * la + t * lb)
        for (pa, la), (pb, lb) in zip(idx_a.entries, idx_b.entries)
    ]
    lorentz = None
    if idx_a.lorentz is not None and idx_b.lorentz is not None:
        lorentz = [s * ra + t * rb for ra, rb in zip(idx_a.lorentz, idx_b.lorentz)]
    return IndexPoint(entries, lorentz)
