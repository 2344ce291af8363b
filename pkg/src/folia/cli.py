"""Command line front end: ``folia verify|modular|bott|builtin``.

Exit codes: 0 success, 1 verification failure, 2 parse error,
3 a computation needed an undeclared bracket.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .algebroid import MissingBracket, anchor_sweep, complex_check, jacobi_sweep, sliced_exactness
from .builders import BUILTINS, REGULAR_BUILTINS
from .modular import ExactWithWitness, NotExactNear, assemble_report
from .parse import ParseError, parse_expr
from .polycore import Poly
from .presentation import (
    dump_algebroid,
    dump_regular,
    parse_algebroid,
    parse_regular,
)
from .regfol import (
    NotProportional,
    flatness_residuals,
    invariance_check,
    transverse_modular_value,
    transverse_witness_residuals,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_MISSING = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _frac(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# --- loading -------------------------------------------------------------------

def _builtin(name: str, n, regular: bool):
    table = REGULAR_BUILTINS if regular else BUILTINS
    if name not in table:
        kind = "regular presentation" if regular else "algebroid"
        raise UsageError(f"unknown builtin {kind} {name!r}; choose from {', '.join(sorted(table))}")
    return table[name](n) if n is not None else table[name]()


def _read(target: list) -> tuple:
    """(kind, name-or-path, text-or-None)."""
    if target[0] == "builtin":
        if len(target) != 2:
            raise UsageError("usage: builtin NAME")
        return "builtin", target[1], None
    if len(target) != 1:
        raise UsageError("expected a single presentation file")
    try:
        with open(target[0], encoding="utf-8") as fh:
            return "file", target[0], fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from None


def load_algebroid(target: list, n=None):
    kind, name, text = _read(target)
    if kind == "builtin":
        return _builtin(name, n, regular=False), [], [], {}
    f = parse_algebroid(text)
    return f.algebroid, f.witnesses, f.points, f.options


def load_regular(target: list, n=None):
    kind, name, text = _read(target)
    if kind == "builtin":
        return _builtin(name, n, regular=True), [], []
    f = parse_regular(text)
    return f.presentation, f.witnesses, f.invariants


# --- report building -----------------------------------------------------------

def _check_dict(rep) -> dict:
    return {
        "passed": rep.passed,
        "checked": rep.checked,
        "failures": list(rep.failures),
        "unchecked": list(rep.unchecked),
    }


def structure_checks(A, jacobi: bool = True, exactness_degree=None) -> dict:
    out = {"complex": _check_dict(complex_check(A)), "anchor": _check_dict(anchor_sweep(A))}
    if jacobi:
        out["jacobi"] = _check_dict(jacobi_sweep(A))
    if exactness_degree is not None:
        ex = sliced_exactness(A, exactness_degree)
        out["sliced_exactness"] = {
            "passed": ex.passed,
            "is_complex": ex.is_complex,
            "degree_bound": ex.bound,
            "slices": [
                {"position": s.position, "degree": s.degree, "kernel_dim": s.kernel_dim,
                 "image_dim": s.image_dim, "exact": s.exact}
                for s in ex.slices
            ],
        }
    return out


def _structure_passed(checks: dict) -> bool:
    return all(v["passed"] for v in checks.values())


def _header(A) -> dict:
    return {"algebroid": A.name, "variables": list(A.variables), "ranks": list(A.bundle.ranks)}


def verify_dict(A, exactness_degree=None) -> dict:
    out = _header(A)
    out["structure_checks"] = structure_checks(A, True, exactness_degree)
    return out


def modular_dict(A, degree_bound=None, points=None, witnesses=()) -> dict:
    rep = assemble_report(A, degree_bound, points, witnesses)
    th = rep.theta
    out = _header(A)
    out["structure_checks"] = structure_checks(A, jacobi=False)
    out["berezinian"] = {"parity": rep.berezinian.parity, "factors": list(rep.berezinian.factors)}
    out["theta"] = {lab: th.values[a].to_str() for a, lab in enumerate(th.labels)}
    out["supertrace"] = {
        lab: {
            "divergence": th.divergences[a].to_str(),
            "traces": [t.to_str() for t in th.traces[a]],
        }
        for a, lab in enumerate(th.labels)
    }
    out["closedness"] = {
        "passed": rep.closedness.passed,
        "failures": rep.closedness.failures(),
        "unchecked": list(rep.closedness.unchecked),
    }
    v = rep.verdict
    ex = {
        "verdict": v.name,
        "degree_bound": rep.degree_bound,
        "polynomial_search": rep.search.to_str() if isinstance(rep.search, Poly) else "infeasible",
        "witness": None,
        "domain": None,
        "obstruction_point": None,
        "obstruction_label": None,
        "obstruction_value": None,
    }
    if isinstance(v, ExactWithWitness):
        ex["witness"] = v.witness.to_str()
        ex["domain"] = v.domain
    elif isinstance(v, NotExactNear):
        ex["obstruction_point"] = [_frac(c) for c in v.point]
        ex["obstruction_label"] = v.label
        ex["obstruction_value"] = _frac(v.value)
        passing = [w for w in rep.witnesses if w.passed]
        if passing:
            ex["witness"] = passing[0].witness.to_str()
            ex["domain"] = passing[0].domain
    out["exactness"] = ex
    out["witness_checks"] = [
        {
            "witness": w.witness.to_str(),
            "passed": w.passed,
            "domain": w.domain,
            "residuals": {k: r.to_str() for k, r in w.residuals.items()},
        }
        for w in rep.witnesses
    ]
    out["unimodular"] = rep.unimodular
    return out


def bott_dict(p, witnesses=(), invariants=()) -> dict:
    out = {"presentation": p.name, "variables": list(p.variables)}
    ann = p.annihilator_residuals()
    out["annihilator"] = {
        "passed": not ann,
        "failures": [f"iota(u{a}) xi{b} = {r.to_str()}" for a, b, r in ann],
    }
    thetas = []
    for u in p.generators:
        thetas.append(transverse_modular_value(p, u).to_str())
    out["theta"] = {f"u{a}": t for a, t in enumerate(thetas)}
    flat = flatness_residuals(p)
    out["flatness"] = {
        "passed": not flat,
        "failures": [f"R(u{a}, u{b}) form{c} = {r.to_str()}" for a, b, c, r in flat],
    }
    out["witness_checks"] = []
    for h in witnesses:
        res = transverse_witness_residuals(p, h)
        out["witness_checks"].append({
            "witness": h.to_str(),
            "passed": all(r.is_zero() for r in res),
            "residuals": {f"u{a}": r.to_str() for a, r in enumerate(res)},
        })
    out["invariance_checks"] = []
    for f, squared in invariants:
        res = [invariance_check(p, u, f, squared) for u in p.generators]
        out["invariance_checks"].append({
            "candidate": f.to_str(),
            "squared": squared,
            "passed": all(r.passed for r in res),
            "residuals": {f"u{a}": r.residual.to_str() for a, r in enumerate(res)},
        })
    return out


# --- text rendering --------------------------------------------------------------

def _render_checks(checks: dict, lines: list):
    for name, rep in checks.items():
        status = "pass" if rep["passed"] else "FAIL"
        extra = ""
        if "checked" in rep:
            extra = f" ({rep['checked']} checked, {len(rep['unchecked'])} unchecked)"
        lines.append(f"  {name}: {status}{extra}")
        for f in rep.get("failures", []):
            lines.append(f"    {f}")
        if name == "sliced_exactness":
            for s in rep["slices"]:
                if not s["exact"]:
                    lines.append(
                        f"    position {s['position']} degree {s['degree']}: "
                        f"kernel {s['kernel_dim']} image {s['image_dim']}"
                    )


def render_text(d: dict) -> str:
    lines = []
    if "algebroid" in d:
        lines.append(f"{d['algebroid'] or 'algebroid'}: variables {', '.join(d['variables'])}, ranks {d['ranks']}")
    else:
        lines.append(f"{d['presentation'] or 'presentation'}: variables {', '.join(d['variables'])}")
    if "structure_checks" in d:
        lines.append("structure checks:")
        _render_checks(d["structure_checks"], lines)
    for key in ("annihilator", "flatness"):
        if key in d:
            lines.append(f"{key}: {'pass' if d[key]['passed'] else 'FAIL'}")
            lines += [f"    {f}" for f in d[key]["failures"]]
    if "theta" in d:
        lines.append("theta:")
        for k, v in d["theta"].items():
            lines.append(f"  {k}: {v}")
    if "supertrace" in d:
        lines.append("supertrace (divergence; traces by level):")
        for k, v in d["supertrace"].items():
            lines.append(f"  {k}: {v['divergence']}; {', '.join(v['traces'])}")
    if "closedness" in d:
        c = d["closedness"]
        lines.append(f"closedness: {'pass' if c['passed'] else 'FAIL'}")
        lines += [f"    {f}" for f in c["failures"]]
        if c["unchecked"]:
            lines.append(f"    unchecked: {', '.join(c['unchecked'])}")
    if "exactness" in d:
        e = d["exactness"]
        lines.append(f"exactness: {e['verdict']} (degree bound {e['degree_bound']}, polynomial search {e['polynomial_search']})")
        if e["witness"] is not None:
            lines.append(f"  witness: {e['witness']} ({e['domain']})")
        if e["obstruction_point"] is not None:
            lines.append(
                f"  obstruction at ({', '.join(e['obstruction_point'])}): "
                f"theta({e['obstruction_label']}) = {e['obstruction_value']}"
            )
    for w in d.get("witness_checks", []):
        lines.append(f"witness {w['witness']}: {'pass' if w['passed'] else 'FAIL'}")
        for k, r in w["residuals"].items():
            if r != "0":
                lines.append(f"    residual {k}: {r}")
    for w in d.get("invariance_checks", []):
        sq = " (squared)" if w["squared"] else ""
        lines.append(f"invariant candidate {w['candidate']}{sq}: {'pass' if w['passed'] else 'FAIL'}")
        for k, r in w["residuals"].items():
            if r != "0":
                lines.append(f"    residual {k}: {r}")
    if "unimodular" in d:
        lines.append(f"unimodular: {d['unimodular']}")
    return "\n".join(lines) + "\n"


def dumps(d: dict) -> str:
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


# --- commands ------------------------------------------------------------------------

def _emit(d: dict, as_json: bool):
    sys.stdout.write(dumps(d) if as_json else render_text(d))


def _parse_point(text: str, nvars: int) -> tuple:
    vals = []
    for chunk in text.split(","):
        e = parse_expr(chunk, ())
        vals.append(e.as_poly().constant_value())
    if len(vals) != nvars:
        raise UsageError(f"obstruction point needs {nvars} coordinates")
    return tuple(vals)


def cmd_verify(args) -> int:
    A, _, _, opts = load_algebroid(args.target, args.n)
    D = args.exactness_degree
    if D is None and "exactness_degree" in opts:
        D = int(opts["exactness_degree"])
    d = verify_dict(A, D)
    _emit(d, args.json)
    return EXIT_OK if _structure_passed(d["structure_checks"]) else EXIT_FAIL


def cmd_modular(args) -> int:
    A, wits, pts, opts = load_algebroid(args.target, args.n)
    D = args.degree_bound
    if D is None and "degree_bound" in opts:
        D = int(opts["degree_bound"])
    wits = list(wits) + [parse_expr(w, A.variables) for w in args.witness]
    pts = list(pts) + [_parse_point(p, A.nvars) for p in args.obstruction_point]
    d = modular_dict(A, D, pts or None, wits)
    _emit(d, args.json)
    ok = _structure_passed(d["structure_checks"]) and d["closedness"]["passed"]
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bott(args) -> int:
    p, wits, invs = load_regular(args.target, args.n)
    wits = list(wits) + [parse_expr(w, p.variables) for w in args.witness]
    for text in args.invariant:
        squared = text.startswith("squared:")
        invs = list(invs) + [(parse_expr(text[8:] if squared else text, p.variables), squared)]
    d = bott_dict(p, wits, invs)
    _emit(d, args.json)
    ok = d["annihilator"]["passed"] and d["flatness"]["passed"]
    ok = ok and all(w["passed"] for w in d["witness_checks"] + d["invariance_checks"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_builtin(args) -> int:
    if args.name in BUILTINS:
        sys.stdout.write(dump_algebroid(_builtin(args.name, args.n, regular=False)))
    elif args.name in REGULAR_BUILTINS:
        sys.stdout.write(dump_regular(_builtin(args.name, args.n, regular=True)))
    elif args.name == "list":
        for k in sorted(BUILTINS):
            sys.stdout.write(f"{k}\talgebroid\n")
        for k in sorted(REGULAR_BUILTINS):
            sys.stdout.write(f"{k}\tregular\n")
    else:
        raise UsageError(f"unknown builtin {args.name!r}; try 'folia builtin list'")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="folia", description="Lie n-algebroid presentations of singular foliations and their modular classes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("target", nargs="+", metavar="FILE | builtin NAME")
        p.add_argument("--n", type=int, default=None, help="size parameter for builtins")
        p.add_argument("--json", action="store_true", help="JSON report on stdout")

    v = sub.add_parser("verify", help="complex, anchor and higher Jacobi checks")
    common(v)
    v.add_argument("--exactness-degree", type=int, default=None, metavar="D",
                   help="also run degree-sliced exactness through degree D")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("modular", help="modular 1-form, closedness and exactness verdict")
    common(m)
    m.add_argument("--degree-bound", type=int, default=None, metavar="D",
                   help="polynomial exactness search degree (default FOLIA_DEGREE_BOUND or 6)")
    m.add_argument("--obstruction-point", action="append", default=[], metavar="P",
                   help="comma separated coordinates, repeatable (default origin)")
    m.add_argument("--witness", action="append", default=[], metavar="EXPR",
                   help="candidate potential such as 'ln(x1^2+x2^2)', repeatable")
    m.set_defaults(func=cmd_modular)

    b = sub.add_parser("bott", help="transverse modular form of a regular presentation")
    common(b)
    b.add_argument("--witness", action="append", default=[], metavar="EXPR")
    b.add_argument("--invariant", action="append", default=[], metavar="EXPR",
                   help="candidate factor f for f*omega; prefix 'squared:' to give f^2")
    b.set_defaults(func=cmd_bott)

    s = sub.add_parser("builtin", help="print a builtin presentation in file format ('list' for names)")
    s.add_argument("name")
    s.add_argument("--n", type=int, default=None)
    s.set_defaults(func=cmd_builtin)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except MissingBracket as exc:
        sys.stderr.write(f"missing bracket: {exc}\n")
        return EXIT_MISSING
    except NotProportional as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
