"""Bott connection on the conormal bundle of a regular foliation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .polycore import (
    DifferentialForm,
    Poly,
    RatLogExpr,
    VectorField,
    apply_vf,
    as_expr,
    exterior_derivative,
    interior_product,
    lie_bracket,
)


class NotProportional(ValueError):
    pass


class RegularPresentation:
    """Generators of a regular distribution with a conormal frame.

    ``frame`` spans the annihilator off the zero set of ``locus``; ``omega``
    is a transverse volume form of degree equal to the corank.
    """

    def __init__(
        self,
        generators: Sequence[VectorField],
        frame: Sequence[DifferentialForm],
        omega: DifferentialForm,
        locus: Poly | None = None,
        name: str = "",
    ):
        if not generators:
            raise ValueError("need at least one generator")
        self.variables = generators[0].variables
        for g in generators:
            if g.variables != self.variables:
                raise ValueError("generator variables differ")
        for f in list(frame) + [omega]:
            if f.variables != self.variables:
                raise ValueError("form variables differ")
        self.generators = tuple(generators)
        self.frame = tuple(frame)
        self.omega = omega
        self.locus = locus
        self.name = name

    def annihilator_residuals(self) -> list:
        """(generator index, frame index, iota_u xi) for every nonzero contraction."""
        out = []
        for a, u in enumerate(self.generators):
            for b, xi in enumerate(self.frame):
                r = interior_product(u, xi)
                if not r.is_zero():
                    out.append((a, b, r))
        return out


def bott_derivative(u: VectorField, xi: DifferentialForm) -> DifferentialForm:
    """iota_u d xi."""
    return interior_product(u, exterior_derivative(xi))


def proportionality_factor(eta: DifferentialForm, omega: DifferentialForm) -> RatLogExpr:
    """f with eta = f * omega, or NotProportional."""
    if eta.degree != omega.degree:
        raise NotProportional("forms of different degree")
    if omega.is_zero():
        raise NotProportional("reference form is zero")
    if eta.is_zero():
        return RatLogExpr(Poly(omega.variables))
    if set(eta.terms) - set(omega.terms):
        raise NotProportional("support not contained in that of the reference form")
    factor = None
    for I, c in omega.terms.items():
        r = eta.terms.get(I, RatLogExpr(Poly(omega.variables))) / c
        if factor is None:
            factor = r
        elif r != factor:
            raise NotProportional(f"ratios {factor} and {r} disagree")
    return factor


def transverse_modular_value(p: RegularPresentation, u: VectorField) -> RatLogExpr:
    """theta_omega(u) where nabla_u omega = theta_omega(u) omega."""
    return proportionality_factor(bott_derivative(u, p.omega), p.omega)


@dataclass(frozen=True)
class InvarianceResult:
    passed: bool
    residual: RatLogExpr


def invariance_check(p: RegularPresentation, u: VectorField, candidate, squared: bool = False) -> InvarianceResult:
    """Is candidate * omega killed by nabla_u?

    Checks u(f) + f theta = 0.  With ``squared`` the candidate is f^2 and the
    relation u(f^2) + 2 f^2 theta = 0 is checked instead, which lets odd
    powers of a radius be handled with rational expressions.
    """
    f = as_expr(candidate)
    theta = transverse_modular_value(p, u)
    k = 2 if squared else 1
    res = apply_vf(u, f) + f * theta * k
    return InvarianceResult(res.is_zero(), res)


def transverse_witness_residuals(p: RegularPresentation, h) -> list:
    """u(h) - theta_omega(u) for each generator; all zero means theta = d_F h."""
    h = as_expr(h)
    return [apply_vf(u, h) - transverse_modular_value(p, u) for u in p.generators]


def flatness_residuals(p: RegularPresentation) -> list:
    """(a, b, form index, curvature applied to the form) for nonzero curvature values."""
    out = []
    forms = list(p.frame) + [p.omega]
    gens = p.generators
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            u, w = gens[a], gens[b]
            uw = lie_bracket(u, w)
            for c, xi in enumerate(forms):
                r = (
                    bott_derivative(u, bott_derivative(w, xi))
                    - bott_derivative(w, bott_derivative(u, xi))
                    - bott_derivative(uw, xi)
                )
                if not r.is_zero():
                    out.append((a, b, c, r))
    return out
