from fractions import Fraction

import pytest
import sympy as sp

from folia.builders import (
    regular_circles,
    regular_euler,
    regular_poisson,
    regular_son,
    regular_spiral,
    spherical_volume_form,
)
from folia.polycore import DifferentialForm, Poly, RatLogExpr, VectorField
from folia.regfol import (
    NotProportional,
    RegularPresentation,
    bott_derivative,
    flatness_residuals,
    invariance_check,
    proportionality_factor,
    transverse_modular_value,
    transverse_witness_residuals,
)

from helpers import to_sympy

ALL = [regular_spiral(), regular_circles(), regular_euler(2), regular_euler(3), regular_euler(4),
       regular_poisson(), regular_son(3), regular_son(4)]


def test_spiral_theta_against_sympy():
    x, y = sp.symbols("x y")
    p = regular_spiral()
    u = p.generators[0]
    # omega = (x+y) dx - (x-y) dy; iota_u d omega for u = (x-y) d_x + (x+y) d_y
    w1, w2 = x + y, -(x - y)
    dw = sp.diff(w2, x) - sp.diff(w1, y)
    eta = (-dw * (x + y), dw * (x - y))
    ratios = {sp.simplify(eta[0] / w1), sp.simplify(eta[1] / w2)}
    assert ratios == {2}
    assert transverse_modular_value(p, u) == 2


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_euler_transverse_theta(n):
    p = regular_euler(n)
    assert transverse_modular_value(p, p.generators[0]) == n


@pytest.mark.parametrize("n", [2, 3, 4])
def test_euler_invariant_form_is_omega_over_r_to_the_n(n):
    p = regular_euler(n)
    q = sum((Poly.var(p.variables, i) ** 2 for i in range(n)), Poly(p.variables))
    u = p.generators[0]
    if n <= 3:  # q^(2n) denominators get slow beyond this
        good = invariance_check(p, u, RatLogExpr(Poly.const(p.variables, 1), q**n), squared=True)
        assert good.passed
    bad = invariance_check(p, u, RatLogExpr(Poly.const(p.variables, 1), q), squared=True)
    assert bad.passed == (n == 1)
    if n > 1:
        assert bad.residual == RatLogExpr(Poly.const(p.variables, 2 * n - 2), q)


def test_spiral_witnesses():
    p = regular_spiral()
    V = p.variables
    q = Poly.var(V, 0) ** 2 + Poly.var(V, 1) ** 2
    assert all(r.is_zero() for r in transverse_witness_residuals(p, RatLogExpr.log(q)))
    half = transverse_witness_residuals(p, RatLogExpr.log(q, Fraction(1, 2)))
    assert half == [RatLogExpr.const(V, -1)]
    assert invariance_check(p, p.generators[0], RatLogExpr(Poly.const(V, 1), q)).passed


def test_poisson_and_son_values():
    p = regular_poisson()
    assert [transverse_modular_value(p, u) for u in p.generators] == [0, 0, -2]
    s = regular_son(4)
    assert all(transverse_modular_value(s, u) == 0 for u in s.generators)
    c = regular_circles()
    assert transverse_modular_value(c, c.generators[0]) == 0


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name + str(len(p.variables)))
def test_flatness_and_annihilation(p):
    assert p.annihilator_residuals() == []
    assert flatness_residuals(p) == []


def test_proportionality_errors():
    V = ("x", "y")
    x = Poly.var(V, 0)
    a = DifferentialForm(V, 1, {(0,): x})
    b = DifferentialForm(V, 1, {(1,): x})
    with pytest.raises(NotProportional):
        proportionality_factor(a, b)
    with pytest.raises(NotProportional):
        proportionality_factor(DifferentialForm(V, 1, {(0,): 1, (1,): 1}), DifferentialForm(V, 1, {(0,): 1, (1,): 2}))
    assert proportionality_factor(a.scale(x), a) == x


def test_spherical_form_is_closed_up_to_scaling():
    V = ("x1", "x2", "x3")
    w = spherical_volume_form(V)
    e = VectorField.euler(V)
    assert bott_derivative(e, w) == w.scale(3)
