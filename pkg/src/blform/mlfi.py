"""Index points for the multilinear fractional integral and the condition
sets attached to it: the general theorem plus the Stein-Weiss, Grafakos and
Komori-Furuya sets it is compared against.

The operator is T(f_1..f_N)(x) = int |y|^-lam prod_j f_j(x - theta_j y) dy.
Its dual form has N + 2 slots f_0, f_1..f_N, f_{N+1}; the last slot carries
|.|^-lam, i.e. exponents (1/p, weight) = (0, lam).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MalformedInputError, PreconditionError
from .indices import (
    GLOBAL,
    ONE,
    TWO,
    ZERO,
    ConditionRecord,
    ConditionVerdict,
    IndexPoint,
    VectorFamily,
    _Checks,
)
from .rational import fmt, to_rational


@dataclass(frozen=True)
class MlfiIndexPoint:
    theta: tuple
    lam: Fraction
    entries: tuple
    k: int = 1

    def __init__(self, theta, lam, entries, k=1):
        th = tuple(to_rational(t) for t in theta)
        if any(t == 0 for t in th):
            raise MalformedInputError("every theta_j must be nonzero")
        if len(set(th)) != len(th):
            raise MalformedInputError("theta_j must be pairwise distinct")
        if not th:
            raise MalformedInputError("need at least one theta")
        if isinstance(k, bool) or int(k) != k or int(k) < 1:
            raise MalformedInputError(f"k must be a positive integer, got {k!r}")
        k = int(k)
        lam = to_rational(lam)
        if not 0 < lam < k:
            raise MalformedInputError(f"lambda = {fmt(lam)} must lie in (0, {k})")
        ents = []
        for j, pair in enumerate(entries):
            ip, lj = to_rational(pair[0]), to_rational(pair[1])
            if not 0 <= ip <= 1:
                raise MalformedInputError(f"1/p_{j} = {fmt(ip)} is outside [0, 1]")
            ents.append((ip, lj))
        if len(ents) != len(th) + 1:
            raise MalformedInputError(
                f"expected {len(th) + 1} exponent pairs (j = 0..N), got {len(ents)}"
            )
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "entries", tuple(ents))
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return len(self.theta)

    @property
    def inv_p(self):
        return tuple(e[0] for e in self.entries)

    @property
    def lams(self):
        return tuple(e[1] for e in self.entries)

    def scaling_slack(self) -> Fraction:
        k = self.k
        return self.lam / k + sum((ip + lj / k for ip, lj in self.entries), ZERO) - TWO


def form_family(idx: MlfiIndexPoint) -> VectorFamily:
    """Vectors (e1, e1 - theta_1 e2, ..., e1 - theta_N e2, e2)."""
    vecs = [(1, 0)] + [(1, -t) for t in idx.theta] + [(0, 1)]
    return VectorFamily(vecs, idx.k)


def form_index(idx: MlfiIndexPoint) -> IndexPoint:
    """The (N+2)-slot index point with the kernel slot at (0, lam)."""
    return IndexPoint(list(idx.entries) + [(ZERO, idx.lam)])


def check_mlfi(idx: MlfiIndexPoint) -> ConditionVerdict:
    k = idx.k
    c = _Checks()
    c.eq("scaling", GLOBAL, idx.scaling_slack() + TWO, TWO)
    c.gt("lambda_range", "lower", idx.lam / k, ZERO)
    c.lt("lambda_range", "upper", idx.lam / k, ONE)
    for j, (ip, lj) in enumerate(idx.entries):
        c.lt("hyper_strict", j, ip + lj / k, ONE)
    c.ge("interpolation", GLOBAL, sum(idx.inv_p, ZERO), ONE)
    lam_total = sum(idx.lams, ZERO)
    c.ge("index", GLOBAL, lam_total, ZERO)
    for ell in range(idx.n + 1):
        c.gt("another_strict", ell, idx.lam + lam_total - idx.lams[ell], ZERO)
    return c.verdict("thm41")


def check_stein_weiss(idx: MlfiIndexPoint) -> ConditionVerdict:
    """Classical linear (N = 1) weighted fractional integration conditions."""
    if idx.n != 1:
        raise PreconditionError(f"Stein-Weiss conditions need N = 1, got N = {idx.n}")
    k = idx.k
    c = _Checks()
    c.eq("scaling", GLOBAL, idx.scaling_slack() + TWO, TWO)
    for j, ip in enumerate(idx.inv_p):
        c.open_unit("open_interval", j, ip)
    c.gt("lambda_range", "lower", idx.lam / k, ZERO)
    c.lt("lambda_range", "upper", idx.lam / k, ONE)
    c.ge("interpolation", GLOBAL, sum(idx.inv_p, ZERO), ONE)
    for j, (ip, lj) in enumerate(idx.entries):
        c.lt("hyper_strict", j, ip + lj / k, ONE)
    c.ge("index", GLOBAL, sum(idx.lams, ZERO), ZERO)
    return c.verdict("stein-weiss")


def check_grafakos(idx: MlfiIndexPoint) -> ConditionVerdict:
    """Unweighted multilinear conditions: all lambda_j = 0, 1/p_j in [0, 1)."""
    if any(lj != 0 for lj in idx.lams):
        raise PreconditionError("Grafakos conditions apply only when every lambda_j = 0")
    k = idx.k
    c = _Checks()
    c.eq("scaling", GLOBAL, idx.lam / k + sum(idx.inv_p, ZERO), TWO)
    for j, ip in enumerate(idx.inv_p):
        c.lt("half_open_interval", j, ip, ONE)
    return c.verdict("grafakos")


def check_komori_furuya(idx: MlfiIndexPoint) -> ConditionVerdict:
    """Bilinear (N = 2) conditions, including sum 1/p_j >= 1 which the
    original statement omits but its proof uses."""
    if idx.n != 2:
        raise PreconditionError(f"Komori-Furuya conditions need N = 2, got N = {idx.n}")
    k = idx.k
    l0, l1, l2 = idx.lams
    c = _Checks()
    c.eq("scaling", GLOBAL, idx.scaling_slack() + TWO, TWO)
    for j, (ip, lj) in enumerate(idx.entries):
        c.lt("hyper_strict", j, ip + lj / k, ONE)
    c.ge("interpolation", GLOBAL, sum(idx.inv_p, ZERO), ONE)
    c.ge("index", GLOBAL, l0 + l1 + l2, ZERO)
    c.ge("kernel_index", GLOBAL, idx.lam + l1 + l2, ZERO)
    c.ge("lambda_cap", 1, idx.lam, l1)
    c.ge("lambda_cap", 2, idx.lam, l2)
    return c.verdict("komori-furuya")


CONDITION_SETS = {
    "thm41": (check_mlfi, None),
    "stein-weiss": (check_stein_weiss, 1),
    "grafakos": (check_grafakos, None),
    "komori-furuya": (check_komori_furuya, 2),
}


def evaluate_set(name: str, idx: MlfiIndexPoint) -> ConditionVerdict:
    """Run a named condition set; points outside its domain are reported
    as not belonging to it (one ``domain`` violation)."""
    try:
        checker, _ = CONDITION_SETS[name]
    except KeyError:
        raise MalformedInputError(
            f"unknown condition set {name!r}; choose from {sorted(CONDITION_SETS)}"
        ) from None
    try:
        return checker(idx)
    except PreconditionError:
        return ConditionVerdict(name, (ConditionRecord("domain", GLOBAL, ZERO, False),))


# The two bilinear examples separating the general theorem from Komori-Furuya.
PINNED_KF_ONLY = MlfiIndexPoint(
    (1, -1), Fraction(1, 4),
    [(Fraction(7, 12), Fraction(-1, 8)), (Fraction(7, 12), Fraction(-1, 8)),
     (Fraction(7, 12), Fraction(1, 4))],
)
PINNED_THM41_ONLY = MlfiIndexPoint(
    (1, -1), Fraction(1, 12),
    [(Fraction(1, 2), Fraction(1, 12)), (Fraction(1, 2), Fraction(1, 12)),
     (Fraction(1, 2), Fraction(1, 4))],
)


@dataclass
class ComparisonReport:
    set_a: str
    set_b: str
    a_only: list = field(default_factory=list)
    b_only: list = field(default_factory=list)
    both: list = field(default_factory=list)
    neither: int = 0

    def to_json(self):
        from .serialization import mlfi_to_json

        def rows(items):
            return [
                {"point": mlfi_to_json(p), "a": va.to_json(), "b": vb.to_json()}
                for p, va, vb in items
            ]

        return {
            "set_a": self.set_a,
            "set_b": self.set_b,
            "a_minus_b": rows(self.a_only),
            "b_minus_a": rows(self.b_only),
            "a_and_b": rows(self.both),
            "neither": self.neither,
        }


def _resolve_arity(set_a, set_b, n):
    arities = {CONDITION_SETS[s][1] for s in (set_a, set_b)} - {None}
    if len(arities) > 1:
        raise PreconditionError(f"{set_a} and {set_b} do not share an arity")
    fixed = arities.pop() if arities else None
    if n is None:
        return fixed if fixed is not None else 2
    if fixed is not None and n != fixed:
        raise PreconditionError(f"N = {n} is incompatible with the arity {fixed}")
    return n


def sample_mlfi_points(rng: random.Random, n: int, k: int, count: int,
                       denominator: int = 12, weight_box: int = 1):
    """Seeded rational points on the scaling hyperplane.

    A quarter of the draws have all lambda_j = 0 (so the unweighted set is
    exercised); the rest solve the scaling equation for lambda_N.
    """
    D = denominator
    theta = tuple(range(1, n + 1))
    points = []
    attempts = 0
    while len(points) < count and attempts < 200 * count:
        attempts += 1
        inv_p = [Fraction(rng.randint(0, D), D) for _ in range(n + 1)]
        if rng.random() < 0.25:
            lam = k * (2 - sum(inv_p, ZERO))
            if not 0 < lam < k:
                continue
            entries = [(ip, ZERO) for ip in inv_p]
        else:
            lam = k * Fraction(rng.randint(1, D - 1), D)
            lams = [k * Fraction(rng.randint(-weight_box * D, weight_box * D), D)
                    for _ in range(n)]
            last = k * (2 - lam / k - sum(inv_p, ZERO)) - sum(lams, ZERO)
            if abs(last) > weight_box * k:
                continue
            entries = list(zip(inv_p, lams + [last]))
        points.append(MlfiIndexPoint(theta, lam, entries, k))
    return points


def compare_condition_sets(set_a: str, set_b: str, budget: int = 2000, seed: int = 0,
                           n=None, k: int = 1, denominator: int = 12) -> ComparisonReport:
    """Sample the scaling hyperplane and sort points by membership."""
    for s in (set_a, set_b):
        if s not in CONDITION_SETS:
            raise MalformedInputError(f"unknown condition set {s!r}")
    if budget <= 0:
        raise PreconditionError("sample budget must be positive")
    n = _resolve_arity(set_a, set_b, n)
    rng = random.Random(seed)
    points = []
    if n == 2 and k == 1:
        points += [PINNED_THM41_ONLY, PINNED_KF_ONLY]
    points += sample_mlfi_points(rng, n, k, budget, denominator)
    report = ComparisonReport(set_a, set_b)
    for p in points:
        va, vb = evaluate_set(set_a, p), evaluate_set(set_b, p)
        if va.satisfied and vb.satisfied:
            report.both.append((p, va, vb))
        elif va.satisfied:
            report.a_only.append((p, va, vb))
        elif vb.satisfied:
            report.b_only.append((p, va, vb))
        else:
            report.neither += 1
    return report
