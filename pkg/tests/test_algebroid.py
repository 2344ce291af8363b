import itertools

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from folia.algebroid import (
    LieNAlgebroid,
    MissingBracket,
    NonHomogeneous,
    NotInImage,
    Unchecked,
    anchor_sweep,
    complex_check,
    jacobi_residual,
    jacobi_sweep,
    lift_vector_field,
    sliced_exactness,
)
from folia.builders import build_euler, build_gln, build_poisson_r3, build_quadratic_r2, build_son
from folia.graded import GradedBundle, Section
from folia.polycore import Poly, VectorField, lie_bracket

from helpers import polys, to_sympy

POISSON = build_poisson_r3()
QUAD = build_quadratic_r2()
SO3 = build_son(3)
SO4 = build_son(4)
GL2 = build_gln(2)
GL3 = build_gln(3)


@pytest.mark.parametrize("A", [POISSON, QUAD, SO3, SO4, GL2, GL3, build_euler(3)], ids=lambda A: A.name)
def test_builders_pass_structure_checks(A):
    assert complex_check(A).passed
    assert anchor_sweep(A).passed
    rep = jacobi_sweep(A)
    assert rep.passed, rep.failures[:3]
    assert rep.checked > 0 or A.depth == 1


def test_quadratic_is_fully_declared():
    rep = jacobi_sweep(QUAD)
    assert rep.unchecked == [] and rep.checked > 100


def test_corrupted_l1_is_caught():
    A = SO3
    good = A.l1[1][0]
    bad = good + Section.basis(A.variables, 0, 0, Poly.var(A.variables, 0))
    B = LieNAlgebroid(A.variables, A.bundle, A.anchor, {1: [bad]}, A.l2, A.l3, name="corrupt")
    rep = complex_check(B)
    assert not rep.passed and "rho(l1(d123))" in rep.failures[0]
    assert not jacobi_sweep(B).passed
    ex = sliced_exactness(B, 2)
    assert not ex.is_complex and not ex.passed


def test_corrupted_bracket_is_caught():
    A = POISSON
    l2 = dict(A.l2)
    key = ((0, 2), (-1, 0))
    l2[key] = l2[key].scale(3)
    B = LieNAlgebroid(A.variables, A.bundle, A.anchor, A.l1, l2, A.l3)
    rep = jacobi_sweep(B)
    assert any(f.startswith("J2(dz, one)") for f in rep.failures)


def test_missing_brackets_become_unchecked():
    res = jacobi_residual(GL3, 3, [(0, 0), (0, 1), (-1, 0)])
    assert isinstance(res, Unchecked) or res.is_zero()
    with pytest.raises(MissingBracket):
        GL3.bracket_entry(((-1, 0), (-1, 1)))


@st.composite
def entries(draw, A):
    k = draw(st.integers(2, 5))
    return tuple(draw(st.sampled_from(A.basis_elements())) for _ in range(k))


@settings(max_examples=200)
@given(st.sampled_from([POISSON, QUAD, SO3, SO4, GL2, GL3]).flatmap(lambda A: st.tuples(st.just(A), entries(A))))
def test_out_of_range_brackets_are_structural_zeros(data):
    A, entry = data
    k = len(entry)
    out = sum(b[0] for b in entry) + 2 - k
    if out > 0 or not A.in_range(out):
        assert A.is_declared(entry)
        assert A.bracket_entry(entry).is_zero()
    elif k >= 4 and A._canonical(entry)[1] != 0:
        with pytest.raises(MissingBracket):
            A.bracket_entry(entry)


def _random_section(A, degree, draw):
    coeffs = {j: draw(polys(A.variables, 2, 2)) for j in range(A.bundle.rank(degree))}
    return Section(A.variables, degree, coeffs)


@settings(max_examples=60)
@given(st.data())
def test_anchor_is_a_morphism_on_sections(data):
    A = data.draw(st.sampled_from([POISSON, QUAD, GL2]))
    s = _random_section(A, 0, data.draw)
    t = _random_section(A, 0, data.draw)
    assert A.rho(A.l2_of(s, t)) == lie_bracket(A.rho(s), A.rho(t))


@settings(max_examples=60)
@given(st.data())
def test_l2_graded_antisymmetry_on_sections(data):
    A = data.draw(st.sampled_from([POISSON, QUAD]))
    d1 = data.draw(st.sampled_from([0, -1]))
    d2 = data.draw(st.sampled_from([0, -1]))
    s = _random_section(A, d1, data.draw)
    t = _random_section(A, d2, data.draw)
    if d1 + d2 < -1:
        return
    sign = 1 if (d1 * d2) % 2 else -1
    assert A.l2_of(s, t) == A.l2_of(t, s).scale(sign)


# --- sliced exactness against a sympy rank oracle ---------------------------------

def _slice_rank_sympy(A, images, d):
    syms = sp.symbols(A.variables)
    mons = [sp.Mul(*[s**k for s, k in zip(syms, e)]) for e in itertools.combinations_with_replacement(range(len(syms)), d)] if d else [sp.Integer(1)]
    mons = list(dict.fromkeys(sp.Mul(*[syms[i] for i in c]) for c in itertools.combinations_with_replacement(range(len(syms)), d))) if d else [sp.Integer(1)]
    cols = []
    for img in images:
        comps = img.components if isinstance(img, VectorField) else [img.coefficient(t) for t in range(A.bundle.rank(img.degree))]
        for m in mons:
            cols.append([sp.expand(to_sympy(c) * m) for c in comps])
    if not cols:
        return 0, 0
    target_mons = set()
    for col in cols:
        for c in col:
            if c != 0:
                target_mons |= set(sp.Poly(c, *syms).monoms())
    tm = sorted(target_mons)
    rows = []
    for col in cols:
        row = []
        for c in col:
            P = sp.Poly(c, *syms) if c != 0 else None
            row += [P.coeff_monomial(m) if P is not None else 0 for m in tm]
        rows.append(row)
    return sp.Matrix(rows).rank() if tm else 0, len(cols)


@pytest.mark.parametrize("A, D", [(SO3, 3), (GL2, 2), (POISSON, 2)], ids=["so3", "gl2", "poisson3"])
def test_sliced_exactness_matches_sympy(A, D):
    rep = sliced_exactness(A, D)
    assert rep.passed
    maps = {0: list(A.anchor)}
    for i in range(1, A.depth):
        maps[i] = list(A.l1[i])
    for s in rep.slices:
        r, dim = _slice_rank_sympy(A, maps[s.position], s.degree)
        assert s.kernel_dim == dim - r


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([SO3, GL2, POISSON]), st.integers(0, 2))
def test_sliced_exactness_monotone_in_bound(A, D):
    small = sliced_exactness(A, D)
    big = sliced_exactness(A, D + 1)
    assert [s for s in big.slices if s.degree <= D] == small.slices


def test_lifts():
    V = SO3.variables
    x1, x2 = Poly.var(V, 0), Poly.var(V, 1)
    X = VectorField(V, [-x2, x1, Poly(V)])
    a = lift_vector_field(SO3, X, 1)
    assert SO3.rho(a) == X
    assert isinstance(lift_vector_field(GL2, VectorField(GL2.variables, [Poly.const(GL2.variables, 1), Poly(GL2.variables)]), 3), NotInImage)


def test_constructor_validation():
    V = ("x",)
    B = GradedBundle([["a"], ["b"]])
    X = VectorField(V, [Poly.var(V, 0)])
    with pytest.raises(ValueError):
        LieNAlgebroid(V, B, [X], {1: []})
    with pytest.raises(ValueError):
        LieNAlgebroid(V, B, [X], {1: [Section.basis(V, -1, 0)]})
    with pytest.raises(ValueError):
        LieNAlgebroid(V, B, [X], {1: [Section(V, 0)]}, {((0, 0), (0, 0)): Section.basis(V, 0, 0)})
