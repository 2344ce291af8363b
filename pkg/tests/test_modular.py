from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import HealthCheck, given, settings, strategies as st

from folia.algebroid import EForm
from folia.builders import (
    build_euler,
    build_gln,
    build_poisson_r3,
    build_quadratic_r2,
    build_son,
)
from folia.graded import top_word, wedge
from folia.modular import (
    BerezinianDescriptor,
    ExactWithWitness,
    InconclusiveAtBound,
    Infeasible,
    NoObstruction,
    NotExactNear,
    Obstructed,
    ad_matrix,
    adjoint_trace,
    assemble_report,
    closedness_check,
    degree_bound_default,
    exactness_search,
    modular_one_form,
    origin_obstruction,
    verify_witness,
)
from folia.polycore import Poly, RatLogExpr, apply_vf

from helpers import polys, to_sympy

BUILT = {
    "poisson3": build_poisson_r3(),
    "quadratic": build_quadratic_r2(),
    "gl2": build_gln(2),
    "gl3": build_gln(3),
    "so3": build_son(3),
    "so4": build_son(4),
}


def wedge_derivation_trace(A, a, level):
    """Coefficient of the top word in sum_j e_1 ^ .. ^ ad_a(e_j) ^ .. ^ e_r."""
    r = A.bundle.rank(-level)
    top = top_word(-level, r)
    out = Poly(A.variables)
    for j in range(r):
        img = A.bracket_entry(((0, a), (-level, j)))
        for t, c in img.coeffs.items():
            factors = list(top.factors)
            factors[j] = (-level, t)
            s, w = wedge(factors, graded=False)
            if s and w == top:
                out = out + c * s
    return out


@pytest.mark.parametrize("name", sorted(BUILT))
def test_trace_matches_wedge_derivation(name):
    A = BUILT[name]
    for a in range(A.bundle.rank(0)):
        for level in range(A.depth):
            assert adjoint_trace(A, a, level) == wedge_derivation_trace(A, a, level)


@pytest.mark.parametrize("name", sorted(BUILT))
def test_theta_matches_sympy_supertrace(name):
    A = BUILT[name]
    th = modular_one_form(A)
    syms = sp.symbols(A.variables)
    for a in range(A.bundle.rank(0)):
        expected = sum(sp.diff(to_sympy(c), s) for c, s in zip(A.anchor[a].components, syms))
        for level in range(A.depth):
            M = sp.Matrix([[to_sympy(c) for c in row] for row in ad_matrix(A, a, level)])
            expected += (-1) ** level * M.trace()
        assert sp.expand(to_sympy(th.values[a]) - expected) == 0


def _matmul(M, N):
    n = len(M)
    return [[sum((M[i][k] * N[k][j] for k in range(n)), Poly(M[0][0].variables)) for j in range(n)] for i in range(n)]


@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow], deadline=None)
@given(st.data())
def test_supertrace_of_commutator_vanishes(data):
    A = BUILT[data.draw(st.sampled_from(sorted(BUILT)))]
    r0 = A.bundle.rank(0)
    a = data.draw(st.integers(0, r0 - 1))
    b = data.draw(st.integers(0, r0 - 1))
    f = data.draw(polys(A.variables, 1, 2))
    total = Poly(A.variables)
    for level in range(A.depth):
        Ma = [[f * c for c in row] for row in ad_matrix(A, a, level)]
        Mb = ad_matrix(A, b, level)
        AB, BA = _matmul(Ma, Mb), _matmul(Mb, Ma)
        tr = sum((AB[i][i] - BA[i][i] for i in range(len(AB))), Poly(A.variables))
        total = total + tr * (-1) ** level
    assert total.is_zero()


def test_berezinian_descriptor():
    B = BerezinianDescriptor(3)
    assert B.factors == ("top T*M", "top E_0", "top E_-1*", "top E_-2")
    assert [B.weight(i) for i in range(3)] == [1, -1, 1]
    assert B.parity == "odd"


@pytest.mark.parametrize("name", sorted(BUILT))
def test_builders_closed(name):
    A = BUILT[name]
    rep = closedness_check(A, modular_one_form(A))
    assert rep.passed, rep.failures()


def test_non_closed_form_detected():
    A = BUILT["poisson3"]
    V = A.variables
    rep = closedness_check(A, EForm.one_form({0: Poly.var(V, "y")}))
    assert not rep.passed and rep.failures()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["poisson3", "so3", "gl2"]), st.data())
def test_exactness_search_recovers_potentials(name, data):
    A = BUILT[name]
    g = data.draw(polys(A.variables, 3, 3))
    theta = EForm.one_form({a: apply_vf(X, g) for a, X in enumerate(A.anchor)})
    found = exactness_search(A, theta, 3)
    assert isinstance(found, Poly)
    for a, X in enumerate(A.anchor):
        assert apply_vf(X, found) == theta.value[a]


def test_exactness_search_infeasible_for_euler():
    A = build_euler(2)
    th = modular_one_form(A)
    for D in range(0, 5):
        assert exactness_search(A, th, D) == Infeasible(D)


def test_obstruction_variants():
    A = build_euler(2)
    th = modular_one_form(A)
    assert isinstance(origin_obstruction(A, th), Obstructed)
    assert isinstance(origin_obstruction(A, th, (1, 0)), NoObstruction)
    with pytest.raises(ValueError):
        origin_obstruction(A, th, (0, 0, 0))


def test_witness_domain_reporting():
    A = build_euler(2)
    th = modular_one_form(A)
    V = A.variables
    q = Poly.var(V, 0) ** 2 + Poly.var(V, 1) ** 2
    w = verify_witness(A, th, RatLogExpr.log(q))
    assert w.passed and w.domain == "off the zero set of (x1^2 + x2^2)"
    bad = verify_witness(A, th, RatLogExpr.log(q, Fraction(1, 2)))
    assert not bad.passed and bad.residuals["one"] == -1


def test_report_verdicts(monkeypatch):
    rep = assemble_report(BUILT["gl3"])
    assert isinstance(rep.verdict, ExactWithWitness) and rep.unimodular == "yes"
    rep = assemble_report(build_euler(2))
    assert isinstance(rep.verdict, NotExactNear) and rep.unimodular == "no"
    rep = assemble_report(build_euler(2), points=[(1, 1)])
    assert isinstance(rep.verdict, InconclusiveAtBound) and rep.unimodular == "unknown"
    monkeypatch.setenv("FOLIA_DEGREE_BOUND", "2")
    assert degree_bound_default() == 2
    assert assemble_report(build_euler(2)).degree_bound == 2
    monkeypatch.setenv("FOLIA_DEGREE_BOUND", "-1")
    with pytest.raises(ValueError):
        degree_bound_default()
