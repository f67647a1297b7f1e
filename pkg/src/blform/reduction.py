"""Reduction of negative weight exponents to non-negative ones.

Starting from alpha = 0, any slot j0 with lambda_j0 - alpha_j0 < 0 is
removed by writing v_j0 = c1 v_j1 + c2 v_j2 for two slots with positive
remaining weight and using

    |v_j0 . x|^d <= 2^d (|c1|^d |v_j1 . x|^d + |c2|^d |v_j2 . x|^d),
    d = alpha_j0 - lambda_j0 > 0.

Each split yields two children (beta, gamma); the leaves of the resulting
binary tree satisfy lambda - alpha >= 0 and sum(alpha) = 0, and

    1 <= sum_leaves C_leaf * prod_j |v_j . x|^alpha_j   for every x,

which integrated against prod f_j(v_j . x) bounds the form by a finite sum
of forms with non-negative weights.

Tie-breaking is fixed: j0 is the smallest slot with negative remaining
weight, j1 the smallest with positive remaining weight, j2 the next
smallest positive one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, PreconditionError
from .indices import (
    GLOBAL,
    ZERO,
    ConditionRecord,
    ConditionVerdict,
    IndexPoint,
    VectorFamily,
    check_sufficient,
    sufficient_for_k,
)
from .rational import fmt, to_rational


@dataclass(frozen=True)
class Split:
    j0: int
    j1: int
    j2: int
    delta: Fraction
    c1: Fraction
    c2: Fraction
    beta: "SubstitutionNode"
    gamma: "SubstitutionNode"

    def branch_factors(self):
        d = float(self.delta)
        two_d = 2.0 ** d
        return two_d * abs(float(self.c1)) ** d, two_d * abs(float(self.c2)) ** d


@dataclass(frozen=True)
class SubstitutionNode:
    alpha: tuple
    split: Optional[Split] = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    def children(self):
        return () if self.split is None else (self.split.beta, self.split.gamma)

    def depth(self) -> int:
        if self.split is None:
            return 0
        return 1 + max(c.depth() for c in self.children())


@dataclass(frozen=True)
class Leaf:
    alpha: tuple
    constant: float
    q_exponents: Optional[tuple] = None


@dataclass(frozen=True)
class ReductionCertificate:
    root: SubstitutionNode
    leaves: tuple
    source_lambda: tuple
    fam: VectorFamily

    @property
    def depth(self) -> int:
        return self.root.depth()


def _support(vec):
    return frozenset(j for j, x in enumerate(vec) if x != 0)


def _residual(lam, alpha):
    return [l - a for l, a in zip(lam, alpha)]


def index_slacks(lam):
    """sum_{j != l} lambda_j for each l."""
    total = sum(lam, ZERO)
    return [total - x for x in lam]


def _build(lam, alpha, fam):
    res = _residual(lam, alpha)
    negative = [j for j, r in enumerate(res) if r < 0]
    if not negative:
        return SubstitutionNode(tuple(alpha))
    j0 = negative[0]
    positive = [j for j, r in enumerate(res) if r > 0]
    if len(positive) < 2:
        # excluded by the index condition on the residual; hitting this is a bug
        raise AssertionError(f"no admissible (j1, j2) for residual {res}")
    j1, j2 = positive[0], positive[1]
    delta = alpha[j0] - lam[j0]
    assert delta > 0
    c1, c2 = fam.solve(j0, j1, j2)
    beta = list(alpha)
    beta[j0] = lam[j0]
    beta[j1] = alpha[j1] + delta
    gamma = list(alpha)
    gamma[j0] = lam[j0]
    gamma[j2] = alpha[j2] + delta
    return SubstitutionNode(
        tuple(alpha),
        Split(j0, j1, j2, delta, c1, c2, _build(lam, beta, fam), _build(lam, gamma, fam)),
    )


def _collect_leaves(node, constant, out):
    if node.split is None:
        out.append(Leaf(node.alpha, constant))
        return
    fb, fg = node.split.branch_factors()
    _collect_leaves(node.split.beta, constant * fb, out)
    _collect_leaves(node.split.gamma, constant * fg, out)


def reduce(lam, fam: VectorFamily) -> ReductionCertificate:
    """Build the substitution tree for the weight vector ``lam``."""
    lam = tuple(to_rational(x) for x in lam)
    if len(lam) != fam.n:
        raise DimensionMismatchError(f"{len(lam)} weights for {fam.n} vectors")
    for ell, s in enumerate(index_slacks(lam)):
        if s < 0:
            raise PreconditionError(
                f"index condition fails at l = {ell + 1}: "
                f"sum of the other weights is {fmt(s)} < 0"
            )
    root = _build(lam, [ZERO] * fam.n, fam)
    leaves = []
    _collect_leaves(root, 1.0, leaves)
    return ReductionCertificate(root, tuple(leaves), lam, fam)


def _walk(node, path_constant):
    yield node, path_constant
    if node.split is not None:
        fb, fg = node.split.branch_factors()
        yield from _walk(node.split.beta, path_constant * fb)
        yield from _walk(node.split.gamma, path_constant * fg)


def verify_certificate(cert: ReductionCertificate) -> ConditionVerdict:
    """Re-derive every structural claim of ``cert`` from scratch."""
    lam = cert.source_lambda
    fam = cert.fam
    n = len(lam)
    lam_plus = [max(x, ZERO) for x in lam]
    items = []

    def rec(tag, index, slack, ok):
        items.append(ConditionRecord(tag, index, Fraction(slack), bool(ok)))

    def node_checks(node, where):
        alpha = node.alpha
        if len(alpha) != n:
            rec("arity", where, len(alpha) - n, False)
            return False
        res = _residual(lam, alpha)
        for j in range(n):
            rec("P1", f"{where}:{j + 1}", lam_plus[j] - res[j], res[j] <= lam_plus[j])
        rec("Z", where, sum(alpha, ZERO), sum(alpha, ZERO) == 0)
        total = sum(res, ZERO)
        for m in range(n):
            rec("Index2", f"{where}:{m + 1}", total - res[m], total - res[m] >= 0)
        rec("average", where, total, total >= 0)
        return True

    root = cert.root
    rec("root", GLOBAL, sum(abs(a) for a in root.alpha),
        len(root.alpha) == n and all(a == 0 for a in root.alpha))

    tree_leaves = []
    stack = [(root, "r", 0, 1.0)]
    max_depth = 0
    while stack:
        node, where, depth, const = stack.pop()
        max_depth = max(max_depth, depth)
        if not node_checks(node, where):
            continue
        res = _residual(lam, node.alpha)
        if node.split is None:
            tree_leaves.append((where, node.alpha, const))
            for j in range(n):
                rec("P", f"{where}:{j + 1}", res[j], res[j] >= 0)
            continue
        s = node.split
        ok_idx = all(0 <= j < n for j in (s.j0, s.j1, s.j2)) and s.j1 != s.j2
        rec("split_indices", where, 0, ok_idx)
        if not ok_idx:
            continue
        rec("split_sign_j0", where, res[s.j0], res[s.j0] < 0)
        rec("split_sign_j1", where, res[s.j1], res[s.j1] > 0)
        rec("split_sign_j2", where, res[s.j2], res[s.j2] > 0)
        rec("split_delta", where, s.delta - (node.alpha[s.j0] - lam[s.j0]),
            s.delta == node.alpha[s.j0] - lam[s.j0] and s.delta > 0)
        v0, v1, v2 = fam.vectors[s.j0], fam.vectors[s.j1], fam.vectors[s.j2]
        comb_ok = all(s.c1 * v1[i] + s.c2 * v2[i] == v0[i] for i in (0, 1))
        rec("basis_combination", where, 0, comb_ok)
        expect_b = list(node.alpha)
        expect_b[s.j0] = lam[s.j0]
        expect_b[s.j1] = node.alpha[s.j1] + s.delta
        expect_g = list(node.alpha)
        expect_g[s.j0] = lam[s.j0]
        expect_g[s.j2] = node.alpha[s.j2] + s.delta
        rec("beta_definition", where, 0, tuple(expect_b) == tuple(s.beta.alpha))
        rec("gamma_definition", where, 0, tuple(expect_g) == tuple(s.gamma.alpha))
        supp = _support(res)
        for child, name in ((s.beta, "b"), (s.gamma, "g")):
            if len(child.alpha) == n:
                child_supp = _support(_residual(lam, child.alpha))
                rec("support_shrink", where + name,
                    len(child_supp) - len(supp),
                    child_supp <= supp - {s.j0})
        fb, fg = s.branch_factors()
        stack.append((s.gamma, where + "g", depth + 1, const * fg))
        stack.append((s.beta, where + "b", depth + 1, const * fb))

    # leaf list must be the tree's leaves in beta-first order with the
    # path-product constants
    tree_leaves_ordered = []
    stack = [(root, 1.0)]
    while stack:
        node, const = stack.pop()
        if node.split is None:
            tree_leaves_ordered.append((node.alpha, const))
        elif len(node.alpha) == n:
            fb, fg = node.split.branch_factors()
            stack.append((node.split.gamma, const * fg))
            stack.append((node.split.beta, const * fb))
    listed = [(tuple(l.alpha), l.constant) for l in cert.leaves]
    same = len(listed) == len(tree_leaves_ordered) and all(
        a == b and math.isclose(ca, cb, rel_tol=1e-12)
        for (a, ca), (b, cb) in zip(listed, tree_leaves_ordered)
    )
    rec("leaf_list", GLOBAL, len(listed) - len(tree_leaves_ordered), same)
    supp_lam = len(_support(lam))
    rec("depth_bound", GLOBAL, supp_lam - max_depth, max_depth <= supp_lam)
    rec("leaf_count_bound", GLOBAL, 2 ** supp_lam - len(tree_leaves),
        len(tree_leaves) <= 2 ** supp_lam)
    return ConditionVerdict("certificate", tuple(items))


def _abs_dots(fam, x):
    """|v_j . x| for sample array x of shape (m, 2k); returns (m, N)."""
    k = fam.k
    x1, x2 = x[:, :k], x[:, k:]
    out = np.empty((x.shape[0], fam.n))
    for j, (a, b) in enumerate(fam.vectors):
        out[:, j] = np.linalg.norm(float(a) * x1 + float(b) * x2, axis=1)
    return out


def draw_pointwise_samples(fam: VectorFamily, count: int, seed: int = 0,
                           box: float = 10.0, tol: float = 1e-12, max_rounds: int = 50):
    """Uniform samples in [-box, box]^{2k} avoiding every line v_j . x = 0."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box, box, size=(count, 2 * fam.k))
    for _ in range(max_rounds):
        bad = (_abs_dots(fam, x) < tol).any(axis=1)
        if not bad.any():
            return x
        x[bad] = rng.uniform(-box, box, size=(int(bad.sum()), 2 * fam.k))
    raise PreconditionError("could not draw samples away from the kernel lines")


def verify_pointwise(cert: ReductionCertificate, samples) -> float:
    """Worst relative slack of the split inequalities and of the composed
    leaf bound over ``samples``; a value <= 1e-9 means no violation."""
    samples = np.asarray(samples, dtype=float)
    fam = cert.fam
    if samples.ndim != 2 or samples.shape[1] != 2 * fam.k:
        raise DimensionMismatchError(f"samples must have shape (m, {2 * fam.k})")
    dots = _abs_dots(fam, samples)
    if (dots < 1e-12).any():
        raise PreconditionError("sample point lies on a kernel line v_j . x = 0")
    logs = np.log(dots)
    worst = -np.inf
    for node, _ in _walk(cert.root, 1.0):
        if node.split is None:
            continue
        s = node.split
        d = float(s.delta)
        fb, fg = s.branch_factors()
        lhs = d * logs[:, s.j0]
        rhs = np.logaddexp(math.log(fb) + d * logs[:, s.j1] if fb > 0 else -np.inf,
                           math.log(fg) + d * logs[:, s.j2] if fg > 0 else -np.inf)
        # (lhs - rhs) / lhs in the original scale
        worst = max(worst, float(np.max(-np.expm1(rhs - lhs))))
    terms = []
    for leaf in cert.leaves:
        alpha = np.array([float(a) for a in leaf.alpha])
        if leaf.constant <= 0:
            continue
        terms.append(math.log(leaf.constant) + logs @ alpha)
    if terms:
        total = np.logaddexp.reduce(np.vstack(terms), axis=0)
        worst = max(worst, float(np.max(-np.expm1(total))))
    else:
        worst = max(worst, 1.0)
    return worst


def derived_exponents(idx: IndexPoint, leaf_alpha, k: int):
    """Exponents 1/q_j = 1/p_j + (lambda_j - alpha_j)/k for one leaf.

    Returns ``(q, flags)`` where ``flags`` maps each claimed property
    ("sum_is_two", "hyper_strict", "open_interval") to a boolean.  The
    index point must satisfy scaling, the strict hyperplane condition, the
    index condition and 1/p_j in (0, 1); the leaf must satisfy P, P1, Z.
    """
    alpha = tuple(to_rational(a) for a in leaf_alpha)
    if len(alpha) != idx.n:
        raise DimensionMismatchError(f"{len(alpha)} leaf entries for {idx.n} slots")
    pre = sufficient_for_k(idx, k)
    bad = [c for c in pre.violations if c.tag != "interpolation"]
    if bad:
        desc = ", ".join(f"{c.tag}[{c.index}] slack {fmt(c.slack)}" for c in bad)
        raise PreconditionError(f"index point outside the admissible region: {desc}")
    lam = idx.lam
    for j in range(idx.n):
        r = lam[j] - alpha[j]
        if r < 0 or r > max(lam[j], ZERO):
            raise PreconditionError(f"leaf violates P/P1 at j = {j + 1}")
    if sum(alpha, ZERO) != 0:
        raise PreconditionError(f"leaf violates Z: sum alpha = {fmt(sum(alpha, ZERO))}")
    q = tuple(ip + (l - a) / k for ip, l, a in zip(idx.inv_p, lam, alpha))
    total = sum(q, ZERO)
    flags = {
        "sum_is_two": total == 2,
        "hyper_strict": all(total - x > 1 for x in q),
        "open_interval": all(0 < x < 1 for x in q),
    }
    return q, flags


def certificate_with_exponents(cert: ReductionCertificate, idx: IndexPoint):
    """Copy of ``cert`` whose leaves carry their derived 1/q_j."""
    leaves = tuple(
        Leaf(l.alpha, l.constant, derived_exponents(idx, l.alpha, cert.fam.k)[0])
        for l in cert.leaves
    )
    return ReductionCertificate(cert.root, leaves, cert.source_lambda, cert.fam)


def classify_lorentz(idx: IndexPoint, fam: VectorFamily) -> ConditionVerdict:
    """Sufficient conditions in the weighted Lorentz scale L^{p_j, r_j}."""
    if idx.lorentz is None:
        raise PreconditionError("index point has no Lorentz exponents 1/r_j")
    base = check_sufficient(idx, fam)
    items = [c for c in base.checks if c.tag != "interpolation"]
    s = sum(idx.lorentz, ZERO) - 1
    items.append(ConditionRecord("interpolation", GLOBAL, s, s >= 0))
    return ConditionVerdict("lorentz", tuple(items))
