"""Line-oriented text format for algebroids and regular presentations.

Algebroid files::

    [variables]
    x, y, z
    [degree 0]
    dx, dy, dz
    [degree -1]
    one
    [anchor]
    dz: -x, -y, 0
    [l1]
    one = y*dx - x*dy
    [l2]
    dz, one = -2*one
    [l3]
    dx, dy, dz = 0
    [witness]
    ln(x^2 + y^2)
    [points]
    0, 0, 0
    [options]
    name = poisson3
    degree_bound = 6

Regular presentations use ``[generators]`` (one vector field per line, as
components), ``[frame]`` and ``[omega]`` (forms such as
``(x+y)*dx - (x-y)*dy`` or ``x*dy/\\dz``), ``[locus]``, ``[witness]`` and
``[invariant]`` (candidate factors, ``squared:`` prefix for f^2).
Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebroid import LieNAlgebroid
from .graded import GradedBundle, Section
from .parse import ParseError, parse_expr, parse_poly
from .polycore import DifferentialForm, Poly, RatLogExpr, VectorField
from .regfol import RegularPresentation


@dataclass
class Line:
    number: int
    text: str
    offset: int  # column of text[0] in the raw line, 0-based


@dataclass
class AlgebroidFile:
    algebroid: LieNAlgebroid
    witnesses: list = field(default_factory=list)
    points: list = field(default_factory=list)
    options: dict = field(default_factory=dict)


@dataclass
class RegularFile:
    presentation: RegularPresentation
    witnesses: list = field(default_factory=list)
    invariants: list = field(default_factory=list)  # (RatLogExpr, squared)
    options: dict = field(default_factory=dict)


_HEADER = re.compile(r"^\[\s*([A-Za-z0-9 _-]+?)\s*\]$")


def _sections(text: str) -> dict:
    out: dict = {}
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        m = _HEADER.match(stripped)
        if m:
            current = re.sub(r"\s+", " ", m.group(1).lower())
            if current in out:
                raise ParseError(f"duplicate section [{current}]", 1, no)
            out[current] = []
            continue
        if current is None:
            raise ParseError("content before the first [section] header", 1, no)
        out[current].append(Line(no, stripped, len(body) - len(body.lstrip())))
    return out


def _split_top(text: str, sep: str) -> list:
    """Split at ``sep`` outside parentheses, keeping column offsets."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


def _names(line: Line) -> list:
    out = []
    for chunk, off in _split_top(line.text, ","):
        name = chunk.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"bad name {name!r}", line.offset + off + 1, line.number)
        out.append(name)
    return out


def _expr(text: str, variables, line: Line, off: int) -> RatLogExpr:
    try:
        return parse_expr(text, variables)
    except ParseError as exc:
        raise exc.at_line(line.number, line.offset + off) from None


def _poly(text: str, variables, line: Line, off: int) -> Poly:
    e = _expr(text, variables, line, off)
    if not e.is_poly():
        raise ParseError(f"not a polynomial: {text.strip()!r}", line.offset + off + 1, line.number)
    return e.as_poly()


def _section(text: str, variables, bundle: GradedBundle, degree: int, line: Line, off: int) -> Section:
    labels = bundle.all_labels()
    ext = tuple(variables) + tuple(labels)
    p = _poly(text, ext, line, off)
    n = len(variables)
    coeffs: dict = {}
    for e, c in p.terms.items():
        lab_part = e[n:]
        if sum(lab_part) != 1:
            raise ParseError(
                "each term must contain exactly one basis label to the first power",
                line.offset + off + 1,
                line.number,
            )
        k = lab_part.index(1)
        d, j = bundle.locate(labels[k])
        if d != degree:
            raise ParseError(
                f"label {labels[k]!r} has degree {d}, expected {degree}",
                line.offset + off + 1,
                line.number,
            )
        coeffs.setdefault(j, {})[e[:n]] = c
    return Section(variables, degree, {j: Poly(variables, t) for j, t in coeffs.items()})


def _kv(line: Line, sep: str) -> tuple:
    if sep not in line.text:
        raise ParseError(f"expected '{sep}'", line.offset + 1, line.number)
    i = line.text.index(sep)
    return line.text[:i], line.text[i + 1:], i + 1


def _options(lines) -> dict:
    out = {}
    for ln in lines or []:
        k, v, _ = _kv(ln, "=")
        out[k.strip()] = v.strip()
    return out


def _variables(secs) -> tuple:
    if "variables" not in secs or not secs["variables"]:
        raise ParseError("missing [variables] section", 1, 1)
    out = []
    for ln in secs["variables"]:
        out.extend(_names(ln))
    if len(set(out)) != len(out):
        raise ParseError("duplicate variable names", 1, secs["variables"][0].number)
    return tuple(out)


def _points(lines, variables) -> list:
    pts = []
    for ln in lines or []:
        vals = []
        for chunk, off in _split_top(ln.text, ","):
            e = _expr(chunk, variables, ln, off)
            if not (e.is_poly() and e.as_poly().is_constant()):
                raise ParseError("point coordinates must be rational numbers", ln.offset + off + 1, ln.number)
            vals.append(e.as_poly().constant_value())
        if len(vals) != len(variables):
            raise ParseError("point length must equal the variable count", ln.offset + 1, ln.number)
        pts.append(tuple(vals))
    return pts


def parse_algebroid(text: str) -> AlgebroidFile:
    secs = _sections(text)
    V = _variables(secs)
    levels = []
    i = 0
    while f"degree {-i}" in secs:
        labs = []
        for ln in secs[f"degree {-i}"]:
            labs.extend(_names(ln))
        levels.append(labs)
        i += 1
    if not levels:
        raise ParseError("missing [degree 0] section", 1, 1)
    for key in secs:
        if key.startswith("degree ") and key not in {f"degree {-k}" for k in range(len(levels))}:
            raise ParseError(f"section [{key}] skips a degree", 1, 1)
    try:
        bundle = GradedBundle(levels)
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1) from None
    clash = set(bundle.all_labels()) & set(V)
    if clash:
        raise ParseError(f"labels clash with variables: {sorted(clash)}", 1, 1)

    anchor: dict = {}
    for ln in secs.get("anchor", []):
        lab, rest, off = _kv(ln, ":")
        lab = lab.strip()
        if lab not in bundle.labels[0]:
            raise ParseError(f"{lab!r} is not a degree-0 label", ln.offset + 1, ln.number)
        comps = [_poly(c, V, ln, off + o) for c, o in _split_top(rest, ",")]
        if len(comps) != len(V):
            raise ParseError("anchor needs one component per variable", ln.offset + off + 1, ln.number)
        anchor[lab] = VectorField(V, comps)
    missing = [lab for lab in bundle.labels[0] if lab not in anchor]
    if missing:
        raise ParseError(f"missing anchor for {missing}", 1, secs["degree 0"][0].number)

    l1: dict = {i: [None] * bundle.rank(-i) for i in range(1, bundle.depth)}
    for ln in secs.get("l1", []):
        lab, rest, off = _kv(ln, "=")
        lab = lab.strip()
        try:
            d, j = bundle.locate(lab)
        except KeyError:
            raise ParseError(f"unknown label {lab!r}", ln.offset + 1, ln.number) from None
        if d == 0:
            raise ParseError("l1 is defined on negative degrees only", ln.offset + 1, ln.number)
        l1[-d][j] = _section(rest, V, bundle, d + 1, ln, off)
    for i, imgs in l1.items():
        for j, s in enumerate(imgs):
            if s is None:
                raise ParseError(f"missing l1 for {bundle.label(-i, j)}", 1, 1)

    tables = {2: {}, 3: {}}
    for k in (2, 3):
        for ln in secs.get(f"l{k}", []):
            lhs, rest, off = _kv(ln, "=")
            labs = _names(Line(ln.number, lhs, ln.offset))
            if len(labs) != k:
                raise ParseError(f"l{k} needs {k} arguments", ln.offset + 1, ln.number)
            try:
                key = tuple(bundle.locate(lab) for lab in labs)
            except KeyError as exc:
                raise ParseError(f"unknown label {exc.args[0]!r}", ln.offset + 1, ln.number) from None
            degree = sum(b[0] for b in key) + 2 - k
            if not bundle.has_degree(degree):
                raise ParseError(f"l{k}({', '.join(labs)}) vanishes for degree reasons", ln.offset + 1, ln.number)
            tables[k][key] = _section(rest, V, bundle, degree, ln, off)

    opts = _options(secs.get("options"))
    try:
        A = LieNAlgebroid(
            V, bundle, [anchor[lab] for lab in bundle.labels[0]], l1, tables[2], tables[3],
            name=opts.get("name", ""),
        )
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1) from None
    wits = [_expr(ln.text, V, ln, 0) for ln in secs.get("witness", [])]
    return AlgebroidFile(A, wits, _points(secs.get("points"), V), opts)


_DIFF = re.compile(r"^(.*?)(?:\*\s*)?(d[A-Za-z_][A-Za-z0-9_]*(?:\s*/\\\s*d[A-Za-z_][A-Za-z0-9_]*)*)\s*$", re.S)


def _form(text: str, variables, line: Line, off: int = 0) -> DifferentialForm:
    terms = []
    # split at top-level + and - while keeping the sign with the term
    depth, start, chunks = 0, 0, []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > 0 and text[:i].strip() and text[:i].rstrip()[-1] not in "*/^(":
            chunks.append((text[start:i], start))
            start = i
    chunks.append((text[start:], start))
    degree = None
    for chunk, o in chunks:
        m = _DIFF.match(chunk.strip())
        if not m:
            raise ParseError("form terms must end in a wedge of differentials", line.offset + off + o + 1, line.number)
        coef_txt, wedge = m.group(1).strip(), m.group(2)
        idx = []
        for w in re.split(r"\s*/\\\s*", wedge):
            name = w[1:]
            if name not in variables:
                raise ParseError(f"unknown differential {w!r}", line.offset + off + o + 1, line.number)
            idx.append(variables.index(name))
        if degree is None:
            degree = len(idx)
        elif degree != len(idx):
            raise ParseError("form terms of different degree", line.offset + off + o + 1, line.number)
        if coef_txt in ("", "+"):
            coef = RatLogExpr.const(variables, 1)
        elif coef_txt == "-":
            coef = RatLogExpr.const(variables, -1)
        else:
            if coef_txt.endswith("*"):
                coef_txt = coef_txt[:-1]
            coef = _expr(coef_txt, variables, line, off + o)
        if len(set(idx)) != len(idx):
            continue
        sign = 1
        srt = list(idx)
        for a in range(len(srt)):
            for b in range(len(srt) - 1 - a):
                if srt[b] > srt[b + 1]:
                    srt[b], srt[b + 1] = srt[b + 1], srt[b]
                    sign = -sign
        terms.append((tuple(srt), coef * sign))
    out = DifferentialForm(variables, degree or 0, {})
    for I, c in terms:
        out = out + DifferentialForm(variables, degree, {I: c})
    return out


def parse_regular(text: str) -> RegularFile:
    secs = _sections(text)
    V = _variables(secs)
    gens = []
    for ln in secs.get("generators", []):
        comps = [_poly(c, V, ln, o) for c, o in _split_top(ln.text, ",")]
        if len(comps) != len(V):
            raise ParseError("generator needs one component per variable", ln.offset + 1, ln.number)
        gens.append(VectorField(V, comps))
    if not gens:
        raise ParseError("missing [generators] section", 1, 1)
    frame = [_form(ln.text, V, ln) for ln in secs.get("frame", [])]
    if not secs.get("omega"):
        raise ParseError("missing [omega] section", 1, 1)
    omega = _form(secs["omega"][0].text, V, secs["omega"][0])
    locus = None
    if secs.get("locus"):
        ln = secs["locus"][0]
        locus = _poly(ln.text, V, ln, 0)
    opts = _options(secs.get("options"))
    pres = RegularPresentation(gens, frame, omega, locus, name=opts.get("name", ""))
    wits = [_expr(ln.text, V, ln, 0) for ln in secs.get("witness", [])]
    invs = []
    for ln in secs.get("invariant", []):
        t = ln.text
        squared = t.startswith("squared:")
        if squared:
            t = t[len("squared:"):]
        invs.append((_expr(t, V, ln, len(ln.text) - len(t)), squared))
    return RegularFile(pres, wits, invs, opts)


def is_regular_text(text: str) -> bool:
    return "generators" in _sections(text)


# --- serialization -------------------------------------------------------------

def _section_str(s: Section, bundle: GradedBundle) -> str:
    if s.is_zero():
        return "0"
    parts = []
    for j in sorted(s.coeffs):
        parts.append(f"({s.coeffs[j].to_str()})*{bundle.label(s.degree, j)}")
    return " + ".join(parts)


def dump_algebroid(A: LieNAlgebroid, witnesses=(), points=(), options=None) -> str:
    out = [f"# {A.name or 'algebroid'}", "[variables]", ", ".join(A.variables)]
    for i, labs in enumerate(A.bundle.labels):
        out += [f"[degree {-i}]", ", ".join(labs)]
    out.append("[anchor]")
    for lab, X in zip(A.bundle.labels[0], A.anchor):
        out.append(f"{lab}: " + ", ".join(c.to_str() for c in X.components))
    if A.depth > 1:
        out.append("[l1]")
        for i in range(1, A.depth):
            for j, s in enumerate(A.l1[i]):
                out.append(f"{A.bundle.label(-i, j)} = {_section_str(s, A.bundle)}")
    for k, table in ((2, A.l2), (3, A.l3)):
        if table:
            out.append(f"[l{k}]")
            for key in sorted(table, key=lambda t: [(-d, j) for d, j in t]):
                out.append(f"{', '.join(A.labels_of(key))} = {_section_str(table[key], A.bundle)}")
    if witnesses:
        out.append("[witness]")
        out += [w.to_str() for w in witnesses]
    if points:
        out.append("[points]")
        out += [", ".join(_frac_str(c) for c in p) for p in points]
    opts = dict(options or {})
    if A.name:
        opts.setdefault("name", A.name)
    if opts:
        out.append("[options]")
        out += [f"{k} = {v}" for k, v in sorted(opts.items())]
    return "\n".join(out) + "\n"


def _frac_str(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _form_str(f: DifferentialForm) -> str:
    if f.is_zero():
        return "0*d" + f.variables[0]
    parts = []
    for I in sorted(f.terms):
        w = "/\\".join(f"d{f.variables[i]}" for i in I)
        parts.append(f"({f.terms[I].to_str()})*{w}")
    return " + ".join(parts)


def dump_regular(p: RegularPresentation, witnesses=(), invariants=()) -> str:
    out = [f"# {p.name or 'regular presentation'}", "[variables]", ", ".join(p.variables), "[generators]"]
    out += [", ".join(c.to_str() for c in g.components) for g in p.generators]
    if p.frame:
        out.append("[frame]")
        out += [_form_str(f) for f in p.frame]
    out += ["[omega]", _form_str(p.omega)]
    if p.locus is not None:
        out += ["[locus]", p.locus.to_str()]
    if witnesses:
        out.append("[witness]")
        out += [w.to_str() for w in witnesses]
    if invariants:
        out.append("[invariant]")
        out += [("squared:" if sq else "") + f.to_str() for f, sq in invariants]
    if p.name:
        out += ["[options]", f"name = {p.name}"]
    return "\n".join(out) + "\n"
