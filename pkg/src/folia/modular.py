"""Modular 1-form of a Lie n-algebroid, closedness, and exactness verdicts."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

from . import linalg
from .algebroid import (
    EForm,
    LieNAlgebroid,
    MissingBracket,
    d0_on_oneform,
    d1_on_oneform,
)
from .polycore import Poly, RatLogExpr, apply_vf, as_expr, divergence, monomials

DEFAULT_DEGREE_BOUND = 6


def degree_bound_default() -> int:
    raw = os.environ.get("FOLIA_DEGREE_BOUND")
    if raw is None or not raw.strip():
        return DEFAULT_DEGREE_BOUND
    D = int(raw)
    if D < 0:
        raise ValueError("FOLIA_DEGREE_BOUND must be non-negative")
    return D


# --- Berezinian bookkeeping -------------------------------------------------

@dataclass(frozen=True)
class BerezinianDescriptor:
    """Factor list of Ber(E): top T*M, top E_0, top E_-1*, top E_-2, ...

    Level i is dualized exactly when i is odd, which is the origin of the
    (-1)^i weight in the supertrace.
    """

    depth: int

    @property
    def parity(self) -> str:
        return "even" if self.depth % 2 == 0 else "odd"

    @property
    def factors(self) -> tuple:
        out = ["top T*M"]
        for i in range(self.depth):
            out.append(f"top E_{-i}" + ("*" if i % 2 else ""))
        return tuple(out)

    def weight(self, level: int) -> int:
        return -1 if level % 2 else 1


# --- traces and the modular form ---------------------------------------------

def ad_matrix(A: LieNAlgebroid, a: int, level: int) -> list:
    """Matrix M[t][j] = coefficient of e_t in l2(e_a, e_j) on E_-level."""
    r = A.bundle.rank(-level)
    M = [[Poly(A.variables) for _ in range(r)] for _ in range(r)]
    for j in range(r):
        val = A.bracket_entry(((0, a), (-level, j)))
        for t, c in val.coeffs.items():
            M[t][j] = c
    return M


def adjoint_trace(A: LieNAlgebroid, a: int, level: int) -> Poly:
    """Trace of b -> l2(e_a, b) on E_-level in the constant basis."""
    out = Poly(A.variables)
    for j in range(A.bundle.rank(-level)):
        val = A.bracket_entry(((0, a), (-level, j)))
        out = out + val.coefficient(j)
    return out


@dataclass
class ModularOneForm:
    """theta_Omega on the degree-0 basis, with its per-level ingredients.

    Omega is the constant section vol ^ mu(0) ^ mu(1)* ^ ... built from the
    standard wedge of each basis.
    """

    labels: tuple
    values: dict
    divergences: dict
    traces: dict  # basis index -> tuple of level traces

    def eform(self) -> EForm:
        return EForm.one_form(self.values)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def value(self, label: str) -> Poly:
        return self.values[self.labels.index(label)]


def modular_one_form(A: LieNAlgebroid) -> ModularOneForm:
    """theta(a) = div rho(a) + sum_i (-1)^i tr(ad_a | E_-i)."""
    ber = BerezinianDescriptor(A.depth)
    values, divs, traces = {}, {}, {}
    for a in range(A.bundle.rank(0)):
        div = divergence(A.anchor[a])
        trs = [adjoint_trace(A, a, i) for i in range(A.depth)]
        total = div
        for i, t in enumerate(trs):
            total = total + t * ber.weight(i)
        values[a] = total
        divs[a] = div
        traces[a] = tuple(trs)
    return ModularOneForm(A.bundle.labels[0], values, divs, traces)


def scaled_modular_value(A: LieNAlgebroid, theta: ModularOneForm, f: Poly, a: int) -> RatLogExpr:
    """Factor of L_a on f*Omega: (rho(a)[f] + f theta(a)) / f."""
    num = apply_vf(A.anchor[a], f) + f * theta.values[a]
    return RatLogExpr(num, f)


# --- closedness ---------------------------------------------------------------

@dataclass
class ClosednessReport:
    d0: dict  # E_-1 label -> residual Poly
    d1: dict  # (label, label) -> residual Poly
    unchecked: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.is_zero() for v in self.d0.values()) and all(
            v.is_zero() for v in self.d1.values()
        )

    def failures(self) -> list:
        out = [f"d0({k}) = {v}" for k, v in self.d0.items() if v]
        out += [f"d1({a}, {b}) = {v}" for (a, b), v in self.d1.items() if v]
        return out


def closedness_check(A: LieNAlgebroid, theta: ModularOneForm | EForm) -> ClosednessReport:
    th = theta.eform() if isinstance(theta, ModularOneForm) else theta
    d0 = {A.bundle.label(-1, j): r for j, r in d0_on_oneform(A, th).items()}
    d1, unchecked = {}, []
    r0 = A.bundle.rank(0)
    for a in range(r0):
        for b in range(a + 1, r0):
            la, lb = A.bundle.label(0, a), A.bundle.label(0, b)
            try:
                d1[(la, lb)] = d1_on_oneform(A, th, a, b)
            except MissingBracket:
                unchecked.append(f"d1({la}, {lb})")
    return ClosednessReport(d0, d1, unchecked)


# --- exactness ----------------------------------------------------------------

@dataclass(frozen=True)
class Infeasible:
    degree_bound: int


def exactness_search(A: LieNAlgebroid, theta: ModularOneForm | EForm, D: int):
    """Polynomial g of degree <= D with rho(a)[g] = theta(a) for every a."""
    if D < 0:
        raise ValueError("degree bound must be non-negative")
    vals = theta.values if isinstance(theta, ModularOneForm) else theta.value
    V = A.variables
    if all(not vals.get(a) for a in range(A.bundle.rank(0))):
        return Poly(V)
    n = len(V)
    unknowns = [m for d in range(1, D + 1) for m in monomials(n, d)]
    eqs: dict = {}
    for a, X in enumerate(A.anchor):
        for u, m in enumerate(unknowns):
            g = Poly.monomial(V, m)
            for e, c in apply_vf(X, g).terms.items():
                row = eqs.setdefault((a, e), {})
                row[u] = row.get(u, 0) + c
    rhs_keys = {(a, e) for a in range(A.bundle.rank(0)) for e in vals.get(a, Poly(V)).terms}
    keys = sorted(set(eqs) | rhs_keys)
    rows = [eqs.get(k, {}) for k in keys]
    rhs = [vals.get(k[0], Poly(V)).coefficient(k[1]) for k in keys]
    sol = linalg.solve(rows, rhs)
    if sol is None:
        return Infeasible(D)
    return Poly(V, {unknowns[u]: v for u, v in sol.items()})


@dataclass(frozen=True)
class Obstructed:
    point: tuple
    label: str
    value: object


@dataclass(frozen=True)
class NoObstruction:
    point: tuple
    reason: str


def origin_obstruction(A: LieNAlgebroid, theta: ModularOneForm | EForm, point: Sequence | None = None):
    """Obstructed when every anchor field vanishes at the point but theta does not.

    If g were C^1 near the point, rho(a)[g] would vanish there for every a,
    so a nonzero theta value rules out exactness on any neighbourhood.
    """
    pt = tuple(point) if point is not None else (0,) * A.nvars
    if len(pt) != A.nvars:
        raise ValueError("point length must equal the variable count")
    vals = theta.values if isinstance(theta, ModularOneForm) else theta.value
    for X in A.anchor:
        if any(c.evaluate(pt) for c in X.components):
            return NoObstruction(pt, "some anchor field is nonzero at the point")
    for a in range(A.bundle.rank(0)):
        v = vals.get(a, Poly(A.variables)).evaluate(pt)
        if v:
            return Obstructed(pt, A.bundle.label(0, a), v)
    return NoObstruction(pt, "theta vanishes at the point")


@dataclass
class WitnessResult:
    witness: RatLogExpr
    passed: bool
    residuals: dict
    domain: str


def witness_domain(g: RatLogExpr) -> str:
    if g.is_poly():
        return "everywhere"
    locus = []
    if not g.den.is_constant():
        locus.append(g.den.to_str())
    locus += [a.to_str() for _, a in g.logs if not a.is_constant()]
    return "off the zero set of " + " * ".join(f"({s})" for s in locus) if locus else "everywhere"


def verify_witness(A: LieNAlgebroid, theta: ModularOneForm | EForm, g) -> WitnessResult:
    """Check rho(a)[g] = theta(a) as rational-log identities."""
    g = as_expr(g)
    vals = theta.values if isinstance(theta, ModularOneForm) else theta.value
    res = {}
    for a in range(A.bundle.rank(0)):
        r = apply_vf(A.anchor[a], g) - vals.get(a, Poly(A.variables))
        res[A.bundle.label(0, a)] = r
    return WitnessResult(g, all(r.is_zero() for r in res.values()), res, witness_domain(g))


# --- verdicts and the report ---------------------------------------------------

@dataclass(frozen=True)
class ExactWithWitness:
    witness: object
    domain: str
    name: str = "ExactWithWitness"


@dataclass(frozen=True)
class NotExactNear:
    point: tuple
    label: str
    value: object
    name: str = "NotExactNear"


@dataclass(frozen=True)
class InconclusiveAtBound:
    degree_bound: int
    name: str = "InconclusiveAtBound"


@dataclass
class ModularReport:
    theta: ModularOneForm
    berezinian: BerezinianDescriptor
    closedness: ClosednessReport
    search: object
    obstructions: list
    witnesses: list
    verdict: object
    degree_bound: int

    @property
    def unimodular(self) -> str:
        if isinstance(self.verdict, ExactWithWitness) and self.verdict.domain == "everywhere":
            return "yes"
        if isinstance(self.verdict, NotExactNear):
            return "no"
        return "unknown"


def assemble_report(
    A: LieNAlgebroid,
    degree_bound: int | None = None,
    points: Sequence[Sequence] | None = None,
    witnesses: Sequence = (),
) -> ModularReport:
    D = degree_bound_default() if degree_bound is None else degree_bound
    theta = modular_one_form(A)
    clos = closedness_check(A, theta)
    search = exactness_search(A, theta, D)
    pts = [tuple(p) for p in points] if points else [(0,) * A.nvars]
    obs = [origin_obstruction(A, theta, p) for p in pts]
    wits = [verify_witness(A, theta, g) for g in witnesses]
    hits = [o for o in obs if isinstance(o, Obstructed)]
    if isinstance(search, Poly):
        verdict = ExactWithWitness(search, "everywhere")
    else:
        full = [w for w in wits if w.passed and w.domain == "everywhere"]
        if full:
            verdict = ExactWithWitness(full[0].witness, "everywhere")
        elif hits:
            h = hits[0]
            verdict = NotExactNear(h.point, h.label, h.value)
        else:
            verdict = InconclusiveAtBound(D)
    if isinstance(verdict, ExactWithWitness) and hits:
        raise AssertionError("a global witness and a pointwise obstruction cannot coexist")
    return ModularReport(theta, BerezinianDescriptor(A.depth), clos, search, obs, wits, verdict, D)
