"""JSON and CSV encodings.

Rationals travel as strings ("7/12", "-1/8") so nothing is lost; reals
(form values, norms, slopes) are plain JSON numbers, except that the
reduction constants are written as 17-significant-digit strings and
infinities as the string "inf".  Every parser reports problems as a
:class:`SchemaError` carrying a JSON pointer to the offending value.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction

from .errors import BLFormError, SchemaError
from .experiments import DataPoint, WitnessReport
from .forms import EvalResult, Method
from .functions import (
    INF,
    Piece,
    PiecewisePowerFunction,
    TensorProductFunction,
    TranslatedBallIndicator,
)
from .indices import IndexPoint, VectorFamily
from .mlfi import MlfiIndexPoint
from .rational import fmt, to_rational
from .reduction import Leaf, ReductionCertificate, Split, SubstitutionNode


def _ptr(path, key):
    return f"{path.rstrip('/')}/{key}"


def _wrap(path, fn, *args):
    try:
        return fn(*args)
    except SchemaError:
        raise
    except BLFormError as exc:
        raise SchemaError(path, str(exc)) from None


def _field(obj, key, path, required=True, default=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        if required:
            raise SchemaError(_ptr(path, key), "missing required field")
        return default
    return obj[key]


def _array(obj, path, length=None):
    if not isinstance(obj, list):
        raise SchemaError(path, "expected an array")
    if length is not None and len(obj) != length:
        raise SchemaError(path, f"expected {length} elements, got {len(obj)}")
    return obj


def _rational(value, path) -> Fraction:
    return _wrap(path, to_rational, value)


def _rationals(obj, path):
    return [_rational(v, _ptr(path, i)) for i, v in enumerate(_array(obj, path))]


def _real(value, path) -> float:
    if isinstance(value, bool):
        raise SchemaError(path, "expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise SchemaError(path, f"expected a real number, got {value!r}")


def _int(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, "expected an integer")
    return value


def num(x):
    """JSON-safe real: infinities become the string "inf"."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


# -- exact objects -------------------------------------------------------------


def family_to_json(fam: VectorFamily):
    return {"vectors": [[fmt(a), fmt(b)] for a, b in fam.vectors], "k": fam.k}


def parse_family(obj, path="/"):
    vecs = [_rationals(v, _ptr(_ptr(path, "vectors"), i))
            for i, v in enumerate(_array(_field(obj, "vectors", path), _ptr(path, "vectors")))]
    k = _int(_field(obj, "k", path, required=False, default=1), _ptr(path, "k"))
    return _wrap(path, VectorFamily, vecs, k)


def index_to_json(idx: IndexPoint):
    out = {"entries": [{"inv_p": fmt(p), "lam": fmt(l)} for p, l in idx.entries]}
    if idx.lorentz is not None:
        out["lorentz"] = [fmt(r) for r in idx.lorentz]
    return out


def _entries(obj, path):
    out = []
    for i, e in enumerate(_array(obj, path)):
        p = _ptr(path, i)
        if isinstance(e, dict):
            out.append((_rational(_field(e, "inv_p", p), _ptr(p, "inv_p")),
                        _rational(_field(e, "lam", p), _ptr(p, "lam"))))
        else:
            pair = _array(e, p, 2)
            out.append((_rational(pair[0], _ptr(p, 0)), _rational(pair[1], _ptr(p, 1))))
    return out


def parse_index(obj, path="/"):
    entries = _entries(_field(obj, "entries", path), _ptr(path, "entries"))
    lor = _field(obj, "lorentz", path, required=False)
    if lor is not None:
        lor = _rationals(lor, _ptr(path, "lorentz"))
    return _wrap(path, IndexPoint, entries, lor)


def mlfi_to_json(idx: MlfiIndexPoint):
    return {
        "theta": [fmt(t) for t in idx.theta],
        "lam": fmt(idx.lam),
        "entries": [{"inv_p": fmt(p), "lam": fmt(l)} for p, l in idx.entries],
        "k": idx.k,
    }


def parse_mlfi(obj, path="/"):
    theta = _rationals(_field(obj, "theta", path), _ptr(path, "theta"))
    lam = _rational(_field(obj, "lam", path), _ptr(path, "lam"))
    entries = _entries(_field(obj, "entries", path), _ptr(path, "entries"))
    k = _int(_field(obj, "k", path, required=False, default=1), _ptr(path, "k"))
    return _wrap(path, MlfiIndexPoint, theta, lam, entries, k)


def verdict_to_json(verdict):
    return verdict.to_json()


# -- certificates ----------------------------------------------------------------


def _node_to_json(node: SubstitutionNode):
    out = {"alpha": [fmt(a) for a in node.alpha], "split": None}
    s = node.split
    if s is not None:
        out["split"] = {
            "j0": s.j0 + 1, "j1": s.j1 + 1, "j2": s.j2 + 1,
            "delta": fmt(s.delta), "c1": fmt(s.c1), "c2": fmt(s.c2),
            "beta": _node_to_json(s.beta), "gamma": _node_to_json(s.gamma),
        }
    return out


def certificate_to_json(cert: ReductionCertificate):
    return {
        "source_lambda": [fmt(x) for x in cert.source_lambda],
        "family": family_to_json(cert.fam),
        "depth": cert.depth,
        "leaves": [
            {
                "alpha": [fmt(a) for a in leaf.alpha],
                "constant": "%.17g" % leaf.constant,
                "q_exponents": None if leaf.q_exponents is None
                else [fmt(q) for q in leaf.q_exponents],
            }
            for leaf in cert.leaves
        ],
        "tree": _node_to_json(cert.root),
    }


def _parse_node(obj, path):
    alpha = tuple(_rationals(_field(obj, "alpha", path), _ptr(path, "alpha")))
    sp = _field(obj, "split", path, required=False)
    if sp is None:
        return SubstitutionNode(alpha)
    p = _ptr(path, "split")
    idx = [_int(_field(sp, key, p), _ptr(p, key)) - 1 for key in ("j0", "j1", "j2")]
    vals = [_rational(_field(sp, key, p), _ptr(p, key)) for key in ("delta", "c1", "c2")]
    beta = _parse_node(_field(sp, "beta", p), _ptr(p, "beta"))
    gamma = _parse_node(_field(sp, "gamma", p), _ptr(p, "gamma"))
    return SubstitutionNode(alpha, Split(*idx, *vals, beta, gamma))


def parse_certificate(obj, path="/"):
    lam = tuple(_rationals(_field(obj, "source_lambda", path), _ptr(path, "source_lambda")))
    fam = parse_family(_field(obj, "family", path), _ptr(path, "family"))
    root = _parse_node(_field(obj, "tree", path), _ptr(path, "tree"))
    leaves = []
    lp = _ptr(path, "leaves")
    for i, leaf in enumerate(_array(_field(obj, "leaves", path), lp)):
        p = _ptr(lp, i)
        alpha = tuple(_rationals(_field(leaf, "alpha", p), _ptr(p, "alpha")))
        const = _real(_field(leaf, "constant", p), _ptr(p, "constant"))
        q = _field(leaf, "q_exponents", p, required=False)
        q = None if q is None else tuple(_rationals(q, _ptr(p, "q_exponents")))
        leaves.append(Leaf(alpha, const, q))
    return ReductionCertificate(root, tuple(leaves), lam, fam)


# -- functions and evaluation results ------------------------------------------


def function_to_json(f):
    if isinstance(f, PiecewisePowerFunction):
        return {
            "k": f.k,
            "pieces": [{"a": num(p.a), "b": num(p.b), "c": num(p.c), "gamma": num(p.gamma)}
                       for p in f.pieces],
        }
    if isinstance(f, TensorProductFunction):
        return {"type": "tensor", "k": f.k, "factor": function_to_json(f.factor)}
    if isinstance(f, TranslatedBallIndicator):
        return {"type": "ball", "center": [num(c) for c in f.center],
                "radius": num(f.radius), "value": num(f.value)}
    raise TypeError(f"cannot serialize {type(f).__name__}")


def parse_function(obj, path="/"):
    kind = _field(obj, "type", path, required=False, default="radial")
    if kind == "radial":
        k = _int(_field(obj, "k", path, required=False, default=1), _ptr(path, "k"))
        pieces = []
        pp = _ptr(path, "pieces")
        for i, piece in enumerate(_array(_field(obj, "pieces", path), pp)):
            p = _ptr(pp, i)
            vals = [_real(_field(piece, key, p), _ptr(p, key)) for key in ("a", "b", "c", "gamma")]
            pieces.append(Piece(*vals))
        return _wrap(path, PiecewisePowerFunction, k, pieces)
    if kind == "tensor":
        k = _int(_field(obj, "k", path), _ptr(path, "k"))
        factor = parse_function(_field(obj, "factor", path), _ptr(path, "factor"))
        return _wrap(path, TensorProductFunction, factor, k)
    if kind == "ball":
        cp = _ptr(path, "center")
        center = [_real(c, _ptr(cp, i)) for i, c in enumerate(_array(_field(obj, "center", path), cp))]
        radius = _real(_field(obj, "radius", path), _ptr(path, "radius"))
        value = _real(_field(obj, "value", path, required=False, default=1.0), _ptr(path, "value"))
        return _wrap(path, TranslatedBallIndicator, tuple(center), radius, value)
    raise SchemaError(_ptr(path, "type"), f"unknown function type {kind!r}")


def eval_to_json(res: EvalResult, budget=None):
    return {
        "value": num(res.value),
        "errorBound": num(res.error_bound),
        "method": res.method.value,
        "seed": res.seed,
        "budget": budget,
        "sampleCount": res.sample_count,
        "exact": None if res.exact is None else fmt(res.exact),
    }


def parse_eval_result(obj, path="/"):
    """Inverse of :func:`eval_to_json`; the budget is not part of EvalResult."""
    try:
        method = Method(_field(obj, "method", path))
    except ValueError as exc:
        raise SchemaError(_ptr(path, "method"), str(exc)) from None
    seed = _field(obj, "seed", path, required=False)
    if seed is not None:
        seed = _int(seed, _ptr(path, "seed"))
    exact = _field(obj, "exact", path, required=False)
    return EvalResult(
        _real(_field(obj, "value", path), _ptr(path, "value")),
        _real(_field(obj, "errorBound", path), _ptr(path, "errorBound")),
        method,
        seed,
        _int(_field(obj, "sampleCount", path, required=False, default=0), _ptr(path, "sampleCount")),
        None if exact is None else _rational(exact, _ptr(path, "exact")),
    )


# -- witness reports -------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, float):
        return num(v)
    return v


def report_to_json(rep: WitnessReport):
    return {
        "kind": rep.kind.value,
        "measured_slope": num(rep.measured_slope),
        "predicted_slope": None if rep.predicted_slope is None else fmt(rep.predicted_slope),
        "residual": num(rep.residual),
        "r_squared": num(rep.r_squared),
        "verdict": rep.verdict.value,
        "direction": rep.direction,
        "data_points": [
            {"param": num(p.param), "value": num(p.value),
             "norms": [num(n) for n in p.norms], "ratio": num(p.ratio)}
            for p in rep.data_points
        ],
        "diagnostics": _jsonable(rep.diagnostics),
    }


def parse_report(obj, path="/"):
    from .experiments import Verdict, WitnessKind

    pred = _field(obj, "predicted_slope", path, required=False)
    points = []
    dp = _ptr(path, "data_points")
    for i, p in enumerate(_array(_field(obj, "data_points", path), dp)):
        q = _ptr(dp, i)
        norms = tuple(_real(n, _ptr(_ptr(q, "norms"), j))
                      for j, n in enumerate(_array(_field(p, "norms", q), _ptr(q, "norms"))))
        points.append(DataPoint(_real(_field(p, "param", q), _ptr(q, "param")),
                                _real(_field(p, "value", q), _ptr(q, "value")),
                                norms,
                                _real(_field(p, "ratio", q), _ptr(q, "ratio"))))
    try:
        kind = WitnessKind(_field(obj, "kind", path))
        verdict = Verdict(_field(obj, "verdict", path))
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None
    return WitnessReport(
        kind,
        _real(_field(obj, "measured_slope", path), _ptr(path, "measured_slope")),
        None if pred is None else _rational(pred, _ptr(path, "predicted_slope")),
        _real(_field(obj, "residual", path), _ptr(path, "residual")),
        _real(_field(obj, "r_squared", path), _ptr(path, "r_squared")),
        verdict,
        _field(obj, "direction", path),
        points,
        _field(obj, "diagnostics", path, required=False, default={}),
    )


def report_to_csv(rep: WitnessReport) -> str:
    """One row per ladder point, for external plotting."""
    width = max((len(p.norms) for p in rep.data_points), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "value", "ratio"] + [f"norm_{j + 1}" for j in range(width)])
    for p in rep.data_points:
        w.writerow([repr(p.param), repr(p.value), repr(p.ratio)] + [repr(n) for n in p.norms])
    return buf.getvalue()
