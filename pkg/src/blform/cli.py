"""Command-line front end.

Every subcommand reads one JSON document (a path, inline JSON, or "-" for
stdin), writes its result to stdout and diagnostics to stderr.  Exit codes:
0 for a positive outcome, 2 for a negative finding (NECESSARY_FAIL,
UNBOUNDED_WITNESS, an unsatisfied condition set, an invalid certificate),
1 for input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import serialization as ser
from .errors import BLFormError, SchemaError
from .experiments import Sw2Mode, Verdict, WitnessKind, WitnessSpec, geometric_ladder, run_witness
from .forms import FormInstance, evaluate_form, evaluate_form_exact, evaluate_form_mc
from .indices import Classification, check_necessary, check_sufficient, classify
from .mlfi import CONDITION_SETS, compare_condition_sets, evaluate_set
from .reduction import certificate_with_exponents, reduce, verify_certificate

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE = 0, 1, 2
SET_NAMES = tuple(CONDITION_SETS)


class UsageError(Exception):
    pass


def _set_key(name):
    if name not in CONDITION_SETS:
        raise UsageError(f"unknown condition set {name!r}; choose from {', '.join(SET_NAMES)}")
    return name


def load_input(text):
    """Parse a path, inline JSON, or '-' (stdin) into a JSON value."""
    if text is None:
        return {}
    if text == "-":
        raw = sys.stdin.read()
    elif text.lstrip().startswith(("{", "[")):
        raw = text
    else:
        try:
            raw = Path(text).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {text}: {exc.strerror}") from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_ladder(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--ladder expects lo:hi:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"cannot parse ladder {text!r}") from None
    try:
        return geometric_ladder(lo, hi, n)
    except BLFormError as exc:
        raise UsageError(str(exc)) from None


def _dump(obj):
    return json.dumps(obj, indent=2) + "\n"


def _checks_csv(verdicts):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["system", "tag", "index", "slack", "ok"])
    for v in verdicts:
        for c in v.checks:
            w.writerow([v.name, c.tag, c.index, ser.fmt(c.slack), "true" if c.ok else "false"])
    return buf.getvalue()


def _violations_text(verdict):
    lines = []
    for c in verdict.violations:
        lines.append(f"  violated {c.tag}[{c.index}] slack {ser.fmt(c.slack)}")
    return lines


# -- subcommands ---------------------------------------------------------------


def cmd_check(doc, args):
    fam = ser.parse_family(ser._field(doc, "family", "/"), "/family")
    idx = ser.parse_index(ser._field(doc, "index", "/"), "/index")
    suff = check_sufficient(idx, fam)
    nec = check_necessary(idx, fam)
    cls = classify(idx, fam)
    code = EXIT_NEGATIVE if cls is Classification.NECESSARY_FAIL else EXIT_OK
    if args.format == "csv":
        return _checks_csv([suff, nec]), code
    if args.format == "human":
        lines = [f"classification: {cls.value}"]
        for v in (suff, nec):
            lines.append(f"{v.name}: {'satisfied' if v.satisfied else 'not satisfied'}")
            lines += _violations_text(v)
        return "\n".join(lines) + "\n", code
    out = {"classification": cls.value, "sufficient": suff.to_json(), "necessary": nec.to_json()}
    return _dump(out), code


def cmd_reduce(doc, args):
    fam = ser.parse_family(ser._field(doc, "family", "/"), "/family")
    if "index" in doc:
        idx = ser.parse_index(doc["index"], "/index")
        cert = certificate_with_exponents(reduce(idx.lam, fam), idx)
    else:
        lam = ser._rationals(ser._field(doc, "lambda", "/"), "/lambda")
        cert = reduce(lam, fam)
    verdict = verify_certificate(cert)
    code = EXIT_OK if verdict.satisfied else EXIT_NEGATIVE
    if args.format == "csv":
        raise UsageError("reduce supports json and human output")
    if args.format == "human":
        lines = [f"depth {cert.depth}, {len(cert.leaves)} leaves, "
                 f"certificate {'valid' if verdict.satisfied else 'INVALID'}"]
        for leaf in cert.leaves:
            alpha = ", ".join(ser.fmt(a) for a in leaf.alpha)
            lines.append(f"  alpha = ({alpha})  C = {'%.17g' % leaf.constant}")
        lines += _violations_text(verdict)
        return "\n".join(lines) + "\n", code
    out = {"valid": verdict.satisfied, "certificate": ser.certificate_to_json(cert)}
    if not verdict.satisfied:
        out["violations"] = [c.to_json() for c in verdict.violations]
    return _dump(out), code


def cmd_eval(doc, args):
    fam = ser.parse_family(ser._field(doc, "family", "/"), "/family")
    fp = "/functions"
    funcs = [ser.parse_function(f, ser._ptr(fp, i))
             for i, f in enumerate(ser._array(ser._field(doc, "functions", "/"), fp))]
    method = ser._field(doc, "method", "/", required=False, default="auto")
    inst = ser._wrap("/", FormInstance, fam, funcs)
    budget = args.budget if args.budget is not None else 10**6
    if method == "auto":
        res = evaluate_form(inst, args.seed, budget)
    elif method == "exact":
        res = evaluate_form_exact(inst)
    elif method == "mc":
        res = evaluate_form_mc(inst, args.seed, budget)
    else:
        raise SchemaError("/method", f"expected auto, exact or mc, got {method!r}")
    if args.format == "csv":
        raise UsageError("eval supports json and human output")
    if args.format == "human":
        text = f"{res.value!r} +/- {res.error_bound!r} ({res.method.value})"
        if res.exact is not None:
            text += f" = {ser.fmt(res.exact)}"
        return text + "\n", EXIT_OK
    budget_out = budget if res.method.value == "MONTE_CARLO" else None
    return _dump(ser.eval_to_json(res, budget_out)), EXIT_OK


def _optional(doc, key, parse, path="/"):
    if key not in doc or doc[key] is None:
        return None
    return parse(doc[key], ser._ptr(path, key))


def build_witness_spec(doc, args):
    try:
        kind = WitnessKind(ser._field(doc, "kind", "/"))
    except ValueError:
        names = ", ".join(k.value for k in WitnessKind)
        raise SchemaError("/kind", f"expected one of {names}") from None
    fam = _optional(doc, "family", ser.parse_family)
    idx = _optional(doc, "index", ser.parse_index)
    ell = _optional(doc, "ell", ser._int)
    direction = doc.get("direction")
    if direction not in (None, "inf", "zero"):
        raise SchemaError("/direction", "expected \"inf\", \"zero\" or null")
    mode = doc.get("mode")
    if mode is not None:
        try:
            mode = Sw2Mode(mode)
        except ValueError:
            raise SchemaError("/mode", "expected FAILING or POSITIVE") from None
    kwargs = dict(
        kind=kind, idx=idx, fam=fam, ell=ell, direction=direction, mode=mode,
        lam2=_optional(doc, "lam2", ser._rational),
        lam3=_optional(doc, "lam3", ser._rational),
        ladder=args.ladder, seed=args.seed,
    )
    eps = _optional(doc, "epsilon", ser._rational)
    if eps is not None:
        kwargs["epsilon"] = eps
    if args.budget is not None:
        kwargs["budget"] = args.budget
    if args.tol is not None:
        kwargs["tol"] = args.tol
    return ser._wrap("/", lambda: WitnessSpec(**kwargs))


def cmd_witness(doc, args):
    rep = run_witness(build_witness_spec(doc, args))
    code = EXIT_NEGATIVE if rep.verdict is Verdict.UNBOUNDED_WITNESS else EXIT_OK
    if args.format == "csv":
        return ser.report_to_csv(rep), code
    if args.format == "human":
        pred = "none" if rep.predicted_slope is None else ser.fmt(rep.predicted_slope)
        lines = [
            f"{rep.kind.value}: {rep.verdict.value}",
            f"  measured slope {rep.measured_slope:.6f} (predicted {pred}), "
            f"R^2 {rep.r_squared:.6f}, direction {rep.direction}",
        ]
        for p in rep.data_points:
            lines.append(f"  {p.param!r:>24}  ratio {p.ratio!r}")
        return "\n".join(lines) + "\n", code
    return _dump(ser.report_to_json(rep)), code


def cmd_mlfi(doc, args):
    idx = ser.parse_mlfi(doc, "/")
    names = args.set or ["thm41"]
    if len(names) != 1:
        raise UsageError("mlfi takes exactly one --set")
    verdict = evaluate_set(_set_key(names[0]), idx)
    code = EXIT_OK if verdict.satisfied else EXIT_NEGATIVE
    if args.format == "csv":
        return _checks_csv([verdict]), code
    if args.format == "human":
        lines = [f"{verdict.name}: {'satisfied' if verdict.satisfied else 'not satisfied'}"]
        lines += _violations_text(verdict)
        return "\n".join(lines) + "\n", code
    return _dump({"set": names[0], "point": ser.mlfi_to_json(idx), "verdict": verdict.to_json()}), code


def cmd_compare(doc, args):
    names = args.set or []
    if len(names) != 2:
        raise UsageError("compare needs exactly two --set options")
    a, b = (_set_key(n) for n in names)
    n = _optional(doc, "n", ser._int)
    k = _optional(doc, "k", ser._int) or 1
    den = _optional(doc, "denominator", ser._int) or 12
    budget = args.budget if args.budget is not None else 2000
    rep = compare_condition_sets(a, b, budget=budget, seed=args.seed, n=n, k=k, denominator=den)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["region", "theta", "lam", "inv_p", "weights"])
        for region, rows in (("a_minus_b", rep.a_only), ("b_minus_a", rep.b_only),
                             ("a_and_b", rep.both)):
            for p, _, _ in rows:
                w.writerow([region, " ".join(map(ser.fmt, p.theta)), ser.fmt(p.lam),
                            " ".join(map(ser.fmt, p.inv_p)), " ".join(map(ser.fmt, p.lams))])
        return buf.getvalue(), EXIT_OK
    if args.format == "human":
        text = (f"{names[0]} only: {len(rep.a_only)}\n{names[1]} only: {len(rep.b_only)}\n"
                f"both: {len(rep.both)}\nneither: {rep.neither}\n")
        return text, EXIT_OK
    return _dump(rep.to_json()), EXIT_OK


COMMANDS = {
    "check": (cmd_check, "classify an index point against a vector family"),
    "reduce": (cmd_reduce, "build and verify a reduction certificate"),
    "eval": (cmd_eval, "evaluate a form on concrete functions"),
    "witness": (cmd_witness, "run a scaling experiment"),
    "mlfi": (cmd_mlfi, "check a fractional-integral index point against a condition set"),
    "compare": (cmd_compare, "compare two condition sets on sampled points"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="blform", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", nargs="?" if name == "compare" else None,
                       help="JSON file, inline JSON, or - for stdin")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--ladder", default=None, help="geometric ladder lo:hi:n")
        p.add_argument("--format", choices=("json", "csv", "human"), default="json")
        p.add_argument("--set", action="append", metavar="NAME",
                       help="condition set: " + ", ".join(SET_NAMES))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.ladder is not None:
            args.ladder = parse_ladder(args.ladder)
        doc = load_input(args.input)
        if not isinstance(doc, dict):
            raise SchemaError("/", "expected an object")
        handler = COMMANDS[args.command][0]
        out, code = handler(doc, args)
    except (BLFormError, UsageError) as exc:
        print(f"blform {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
