"""Hypothesis strategies and sympy converters shared by the test modules."""

from fractions import Fraction

import sympy as sp
from hypothesis import strategies as st

from folia.polycore import DifferentialForm, Poly, RatLogExpr, VectorField

V2 = ("x", "y")
V3 = ("x", "y", "z")

small_fracs = st.builds(
    Fraction, st.integers(-5, 5), st.integers(1, 3)
)


@st.composite
def polys(draw, variables=V3, max_deg=3, max_terms=4):
    n = len(variables)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = tuple(draw(st.lists(st.integers(0, max_deg), min_size=n, max_size=n)))
        if sum(e) <= max_deg:
            terms[e] = draw(small_fracs)
    return Poly(variables, terms)


@st.composite
def vector_fields(draw, variables=V3, max_deg=2):
    return VectorField(variables, [draw(polys(variables, max_deg, 3)) for _ in variables])


@st.composite
def forms(draw, variables=V3, degree=None, max_deg=2):
    n = len(variables)
    k = draw(st.integers(0, n)) if degree is None else degree
    from itertools import combinations

    words = list(combinations(range(n), k))
    terms = {}
    for I in draw(st.lists(st.sampled_from(words), max_size=3)):
        terms[I] = draw(polys(variables, max_deg, 2))
    return DifferentialForm(variables, k, terms)


def to_sympy(p, variables=None):
    """Poly or rational RatLogExpr -> sympy expression."""
    if isinstance(p, RatLogExpr):
        syms = sp.symbols(p.variables)
        out = to_sympy(p.num) / to_sympy(p.den)
        for c, a in p.logs:
            out += sp.Rational(c.numerator, c.denominator) * sp.log(to_sympy(a))
        return out
    syms = sp.symbols(p.variables) if p.variables else ()
    out = sp.Integer(0)
    for e, c in p.terms.items():
        m = sp.Rational(c.numerator, c.denominator)
        for s, k in zip(syms, e):
            m *= s**k
        out += m
    return out


def from_sympy(expr, variables) -> Poly:
    syms = sp.symbols(variables)
    P = sp.Poly(sp.expand(expr), *syms)
    return Poly(variables, {m: Fraction(int(c.p), int(c.q)) for m, c in P.terms()})
