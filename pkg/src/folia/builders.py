"""Constructors for the standard example algebroids and regular presentations."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Mapping, Sequence

from .algebroid import LieNAlgebroid, anchor_morphism_check
from .graded import GradedBundle, Section
from .polycore import DifferentialForm, Poly, VectorField, lie_bracket
from .regfol import RegularPresentation


class CrossBracketNonZero(ValueError):
    pass


def default_variables(n: int) -> tuple:
    return tuple(f"x{i}" for i in range(1, n + 1))


def _sec(variables, degree: int, coeffs: Mapping[int, object]) -> Section:
    return Section(variables, degree, coeffs)


# --- depth one ------------------------------------------------------------

def build_single_vf(X: VectorField, name: str = "single_vf", label: str = "one") -> LieNAlgebroid:
    """Rank-one trivial algebroid with anchor X."""
    return LieNAlgebroid(X.variables, GradedBundle([[label]]), [X], name=name)


def build_euler(n: int, variables: Sequence[str] | None = None) -> LieNAlgebroid:
    if n < 1:
        raise ValueError("n must be positive")
    V = tuple(variables) if variables else default_variables(n)
    return build_single_vf(VectorField.euler(V), name=f"euler{n}")


def build_contrast_flat() -> LieNAlgebroid:
    """(x2^2 + x3^2) d_1 on R^3: divergence free."""
    V = default_variables(3)
    x2, x3 = Poly.var(V, 1), Poly.var(V, 2)
    X = VectorField(V, [x2 * x2 + x3 * x3, Poly(V), Poly(V)])
    return build_single_vf(X, name="flat-field")


def build_contrast_radial() -> LieNAlgebroid:
    """x1 d_1 on R^3: vanishes on the plane x1 = 0 with divergence 1."""
    V = default_variables(3)
    X = VectorField(V, [Poly.var(V, 0), Poly(V), Poly(V)])
    return build_single_vf(X, name="radial-x1")


# --- Poisson structure on R^3 ---------------------------------------------

def build_poisson_r3() -> LieNAlgebroid:
    """Cotangent algebroid of pi = (x d_x + y d_y) ^ d_z, resolved in depth 2.

    E_0 = <dx, dy, dz>, E_-1 = <one>, l1(one) = y dx - x dy.
    """
    V = ("x", "y", "z")
    x, y, _ = (Poly.var(V, v) for v in V)
    zero = Poly(V)
    bundle = GradedBundle([["dx", "dy", "dz"], ["one"]])
    anchor = [
        VectorField(V, [zero, zero, x]),
        VectorField(V, [zero, zero, y]),
        VectorField(V, [-x, -y, zero]),
    ]
    l1 = {1: [_sec(V, 0, {0: y, 1: -x})]}
    dx, dy, dz, one = (0, 0), (0, 1), (0, 2), (-1, 0)
    l2 = {
        (dx, dy): _sec(V, 0, {}),
        (dx, dz): _sec(V, 0, {0: 1}),
        (dy, dz): _sec(V, 0, {1: 1}),
        (dx, one): _sec(V, -1, {}),
        (dy, one): _sec(V, -1, {}),
        (dz, one): _sec(V, -1, {0: -2}),
    }
    # cotangent algebroid of a Poisson structure: strict Jacobi on E_0
    l3 = {(dx, dy, dz): _sec(V, -1, {})}
    return LieNAlgebroid(V, bundle, anchor, l1, l2, l3, name="poisson3")


# --- quadratic vector fields on R^2 -----------------------------------------

_QUAD_MATS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
_QUAD_VECS = ((1, 0), (0, 1))


def build_quadratic_r2() -> LieNAlgebroid:
    """Vector fields on R^2 with quadratic coefficients.

    E_0 = Sym^2 tensor R^2 with basis (A, X): e1..e3 pair E11, Sym12, E22
    with (1, 0), e4..e6 with (0, 1).  E_-1 = R^2 tensor R^2 with basis
    ((alpha, beta), Y): f1, f2 for Y = (1, 0), f3, f4 for Y = (0, 1).
    """
    V = ("x", "y")
    x, y = Poly.var(V, "x"), Poly.var(V, "y")
    zero = Poly(V)
    E0 = [(A, X) for X in _QUAD_VECS for A in _QUAD_MATS]
    E1 = [(al, X) for X in _QUAD_VECS for al in _QUAD_VECS]
    half = Fraction(1, 2)

    def quad(A):
        a, b, c = A
        return x * x * a + x * y * (2 * b) + y * y * c

    def along(X, f):
        # X-bar(f) for constant X
        return X[0] * _d(f, 0) + X[1] * _d(f, 1)

    def sym_section(M, X) -> dict:
        return {E0.index((A, X)): M[i] for i, A in enumerate(_QUAD_MATS) if M[i]}

    def vec_section(al, X) -> dict:
        return {E1.index((b, X)): al[i] for i, b in enumerate(_QUAD_VECS) if al[i]}

    def add(d: dict, other: dict):
        for k, v in other.items():
            d[k] = d.get(k, zero) + v

    anchor = [VectorField(V, [quad(A) * X[0], quad(A) * X[1]]) for A, X in E0]

    l1 = {1: []}
    for (al, X) in E1:
        a_, b_ = al
        M = (y * (2 * a_), x * (-a_) + y * b_, x * (-2 * b_))
        l1[1].append(_sec(V, 0, sym_section(M, X)))

    l2 = {}
    for i, (A, X) in enumerate(E0):
        for j, (B, Y) in enumerate(E0):
            if j <= i:
                continue
            s: dict = {}
            add(s, sym_section(tuple(along(X, quad(B)) * m for m in A), Y))
            add(s, sym_section(tuple(-along(Y, quad(A)) * m for m in B), X))
            l2[((0, i), (0, j))] = _sec(V, 0, s)
        for j, (al, Y) in enumerate(E1):
            a, b, c = A
            u, v = X
            alpha, beta = al
            first = (
                x * (alpha * a * u) + x * (2 * alpha * b * v) + y * (alpha * c * v)
                + y * (beta * a * u) - x * (beta * a * v),
                x * (beta * a * u) + y * (2 * beta * b * u) + y * (beta * c * v)
                + x * (alpha * c * v) - y * (alpha * c * u),
            )
            s = {}
            add(s, vec_section(first, Y))
            ybar_a = along(Y, quad(A))
            add(s, vec_section((-ybar_a * alpha, -ybar_a * beta), X))
            l2[((0, i), (-1, j))] = _sec(V, -1, s)

    l3 = {}
    for i, j, k in combinations(range(6), 3):
        s = {}
        for p, q, r in ((i, j, k), (j, k, i), (k, i, j)):
            (A1, X1), (A2, X2), (A3, X3) = E0[p], E0[q], E0[r]
            a1, b1, c1 = A1
            a2, b2, c2 = A2
            coef = along(X1, along(X2, quad(A3)))
            al = (
                x * (b1 * a2 - a1 * b2) + y * (half * (c1 * a2 - a1 * c2)),
                y * (c1 * b2 - b1 * c2) + x * (half * (c1 * a2 - a1 * c2)),
            )
            add(s, vec_section((coef * al[0], coef * al[1]), X3))
        l3[((0, i), (0, j), (0, k))] = _sec(V, -1, s)

    bundle = GradedBundle([[f"e{i}" for i in range(1, 7)], [f"f{i}" for i in range(1, 5)]])
    return LieNAlgebroid(V, bundle, anchor, l1, l2, l3, name="quadratic")


def _d(f: Poly, i: int) -> Poly:
    from .polycore import derive

    return derive(f, i)


# --- gl_n acting on R^n ---------------------------------------------------------

def _idx_str(I: Sequence[int], n: int) -> str:
    return ("" if n < 10 else "_").join(str(i) for i in I)


def gln_basis(n: int, p: int) -> list:
    """Ordered basis (I, k) of level p: k outer, I lexicographic inner; 1-based."""
    return [(I, k) for k in range(1, n + 1) for I in combinations(range(1, n + 1), p + 1)]


def gln_label(n: int, p: int, I: Sequence[int], k: int) -> str:
    return f"e{p}_{_idx_str(I, n)}_{k}"


def _insert_sorted(I: tuple, pos: int, new: int) -> tuple:
    """Replace I[pos] by new; return (sign, sorted tuple) or (0, None) on repeats."""
    J = list(I)
    J[pos] = new
    if len(set(J)) != len(J):
        return 0, None
    s = 1
    for a in range(len(J)):
        for b in range(a + 1, len(J)):
            if J[a] > J[b]:
                s = -s
    return s, tuple(sorted(J))


def build_gln(n: int) -> LieNAlgebroid:
    """Action of gl_n on R^n resolved by E_-p = wedge^{p+1} (R^n)* tensor R^n.

    Basis e^(p)_{I,k} with |I| = p + 1.  rho(e_{i,j}) = x_i d_j and
    l1(e_{I,k}) = sum_l (-1)^(l-1) x_{i_l} e_{I minus i_l, k}.
    Brackets among negative degrees and l3 are left undeclared.
    """
    if n < 1:
        raise ValueError("n must be positive")
    V = default_variables(n)
    xs = [Poly.var(V, i) for i in range(n)]
    zero = Poly(V)
    bases = [gln_basis(n, p) for p in range(n)]
    where = [{b: j for j, b in enumerate(B)} for B in bases]
    labels = [[gln_label(n, p, I, k) for I, k in bases[p]] for p in range(n)]
    bundle = GradedBundle(labels)

    anchor = []
    for (I, j) in bases[0]:
        i = I[0]
        comps = [zero] * n
        comps[j - 1] = xs[i - 1]
        anchor.append(VectorField(V, comps))

    l1 = {}
    for p in range(1, n):
        imgs = []
        for I, k in bases[p]:
            coeffs = {}
            for l, il in enumerate(I):
                J = I[:l] + I[l + 1:]
                coeffs[where[p - 1][(J, k)]] = xs[il - 1] * (-1 if l % 2 else 1)
            imgs.append(_sec(V, -p + 1, coeffs))
        l1[p] = imgs

    l2 = {}
    for a, ((i,), j) in enumerate(bases[0]):
        for p in range(n):
            for b, (I, k) in enumerate(bases[p]):
                if p == 0 and b < a:
                    continue
                coeffs: dict = {}
                for l, il in enumerate(I):
                    if il == j:
                        s, J = _insert_sorted(I, l, i)
                        if s:
                            t = where[p][(J, k)]
                            coeffs[t] = coeffs.get(t, 0) + s
                if k == i:
                    t = where[p][(I, j)]
                    coeffs[t] = coeffs.get(t, 0) - 1
                l2[((0, a), (-p, b))] = _sec(V, -p, coeffs)
    return LieNAlgebroid(V, bundle, anchor, l1, l2, name=f"gl{n}")


def gln_rank(n: int, p: int) -> int:
    return n * comb(n, p + 1)


# --- so_n acting on R^n -------------------------------------------------------

def son_label(I: Sequence[int], n: int) -> str:
    return "d" + _idx_str(I, n)


def build_son(n: int) -> LieNAlgebroid:
    """Koszul resolution of the so_n action: E_-i = wedge^{i+2} T R^n.

    l1 is contraction with d(phi), phi = sum x_i^2 / 2; l2 of a constant
    d_{kl} with d_I rotates one index.  l3 and brackets between negative
    degrees are left undeclared.
    """
    if n < 2:
        raise ValueError("so_n needs n >= 2")
    V = default_variables(n)
    xs = [Poly.var(V, i) for i in range(n)]
    zero = Poly(V)
    bases = [list(combinations(range(1, n + 1), i + 2)) for i in range(n - 1)]
    where = [{I: j for j, I in enumerate(B)} for B in bases]
    bundle = GradedBundle([[son_label(I, n) for I in B] for B in bases])

    anchor = []
    for k, l in bases[0]:
        comps = [zero] * n
        comps[l - 1] = xs[k - 1]
        comps[k - 1] = -xs[l - 1]
        anchor.append(VectorField(V, comps))

    l1 = {}
    for i in range(1, n - 1):
        imgs = []
        for I in bases[i]:
            coeffs = {}
            for j, ij in enumerate(I):
                J = I[:j] + I[j + 1:]
                coeffs[where[i - 1][J]] = xs[ij - 1] * (-1 if j % 2 else 1)
            imgs.append(_sec(V, -i + 1, coeffs))
        l1[i] = imgs

    def prepend(m: int, J: tuple):
        if m in J:
            return 0, None
        pos = sum(1 for t in J if t < m)
        return (-1 if pos % 2 else 1), tuple(sorted(J + (m,)))

    l2 = {}
    for a, (k, l) in enumerate(bases[0]):
        for i in range(n - 1):
            for b, I in enumerate(bases[i]):
                if i == 0 and b < a:
                    continue
                coeffs: dict = {}
                for j, ij in enumerate(I, start=1):
                    J = I[: j - 1] + I[j:]
                    for m, delta_src, sgn in ((l, k, 1), (k, l, -1)):
                        if ij != delta_src:
                            continue
                        s, K = prepend(m, J)
                        if s:
                            t = where[i][K]
                            coeffs[t] = coeffs.get(t, 0) + sgn * s * (-1) ** j
                l2[((0, a), (-i, b))] = _sec(V, -i, coeffs)
    return LieNAlgebroid(V, bundle, anchor, l1, l2, name=f"so{n}")


def _canon(e: tuple) -> tuple:
    return (-e[0], e[1])


# --- direct sums ------------------------------------------------------------------

def direct_sum(
    A: LieNAlgebroid,
    B: LieNAlgebroid,
    cross_l2: Mapping[tuple, Mapping[str, object]] | None = None,
) -> LieNAlgebroid:
    """Block sum of two algebroids; cross brackets default to zero.

    Variables are merged by name.  Labels of B that collide with labels of A
    get a ``_2`` suffix (repeated until unique).  ``cross_l2`` may override
    individual cross entries: it maps (label_a, label_b) to a dict
    label -> coefficient (Poly or number) using the merged labels.
    Raises CrossBracketNonZero when anchors of A and B fail to commute.
    """
    V = A.variables + tuple(v for v in B.variables if v not in A.variables)
    depth = max(A.depth, B.depth)
    taken = set(A.bundle.all_labels())
    rename = {}
    for lab in B.bundle.all_labels():
        new = lab
        while new in taken:
            new += "_2"
        taken.add(new)
        rename[lab] = new

    labels, offset = [], {}
    for i in range(depth):
        la = list(A.bundle.labels[i]) if i < A.depth else []
        lb = [rename[t] for t in B.bundle.labels[i]] if i < B.depth else []
        offset[i] = len(la)
        labels.append(la + lb)
    bundle = GradedBundle(labels)

    def emb_a(s: Section) -> Section:
        return Section(V, s.degree, {j: c.embed(V) for j, c in s.coeffs.items()})

    def emb_b(s: Section) -> Section:
        off = offset[-s.degree] if s.coeffs else 0
        return Section(V, s.degree, {j + off: c.embed(V) for j, c in s.coeffs.items()})

    def vf(X: VectorField) -> VectorField:
        comps = {v: c.embed(V) for v, c in zip(X.variables, X.components)}
        return VectorField(V, [comps.get(v, Poly(V)) for v in V])

    anchor = [vf(X) for X in A.anchor] + [vf(X) for X in B.anchor]
    for a, Xa in enumerate(A.anchor):
        for b, Xb in enumerate(B.anchor):
            if not lie_bracket(vf(Xa), vf(Xb)).is_zero():
                raise CrossBracketNonZero(
                    f"[rho({A.bundle.label(0, a)}), rho({B.bundle.label(0, b)})] != 0"
                )

    l1 = {}
    for i in range(1, depth):
        imgs = [emb_a(s) for s in A.l1.get(i, ())] + [emb_b(s) for s in B.l1.get(i, ())]
        l1[i] = imgs

    def key_b(key):
        return tuple((d, j + offset[-d]) for d, j in key)

    l2 = {k: emb_a(v) for k, v in A.l2.items()}
    l2.update({key_b(k): emb_b(v) for k, v in B.l2.items()})
    l3 = {k: emb_a(v) for k, v in A.l3.items()}
    l3.update({key_b(k): emb_b(v) for k, v in B.l3.items()})

    a_elems = [(d, j) for d, j in A.basis_elements()]
    b_elems = [(d, j + offset[-d]) for d, j in B.basis_elements()]
    for ea in a_elems:
        for eb in b_elems:
            out = ea[0] + eb[0]
            if bundle.has_degree(out) and (ea[0] == 0 or eb[0] == 0):
                l2[tuple(sorted((ea, eb), key=_canon))] = Section(V, out)
    for combo in product(a_elems + b_elems, repeat=3):
        if not (set(combo) & set(a_elems) and set(combo) & set(b_elems)):
            continue
        out = sum(e[0] for e in combo) - 1
        if bundle.has_degree(out) and sorted(combo, key=_canon) == list(combo):
            l3[tuple(combo)] = Section(V, out)
    for (la, lb), coeffs in (cross_l2 or {}).items():
        ea, eb = bundle.locate(la), bundle.locate(lb)
        out = ea[0] + eb[0]
        sec = Section(V, out, {})
        for lab, c in coeffs.items():
            d, j = bundle.locate(lab)
            if d != out:
                raise ValueError(f"cross bracket value {lab} must have degree {out}")
            sec = sec + Section(V, out, {j: c if isinstance(c, Poly) else Poly.const(V, c)})
        key = tuple(sorted((ea, eb), key=_canon))
        l2[key] = sec if key == (ea, eb) else sec.scale(-1 if (ea[0] * eb[0]) % 2 == 0 else 1)
    C = LieNAlgebroid(V, bundle, anchor, l1, l2, l3, name=f"{A.name}+{B.name}")
    # the cross entries just declared must be anchor-compatible
    for a in range(A.bundle.rank(0)):
        for b in range(B.bundle.rank(0)):
            if not anchor_morphism_check(C, a, b + offset[0]).is_zero():
                raise CrossBracketNonZero("cross bracket incompatible with the anchor")
    return C


def son_euler_lifted_cross(n: int) -> dict:
    """Cross brackets l2(one, d_I) = i d_I at level i for so_n + Euler.

    With zero cross brackets the arity-2 Jacobi identity fails on
    (one, d_I) for |I| >= 3; these values repair it.
    """
    out = {}
    for i in range(1, n - 1):
        for I in combinations(range(1, n + 1), i + 2):
            lab = son_label(I, n)
            out[("one", lab)] = {lab: i}
    return out


# --- regular presentations ----------------------------------------------------

def regular_spiral() -> RegularPresentation:
    V = ("x", "y")
    x, y = Poly.var(V, "x"), Poly.var(V, "y")
    v = VectorField(V, [x - y, x + y])
    omega = DifferentialForm(V, 1, {(0,): x + y, (1,): -(x - y)})
    return RegularPresentation([v], [omega], omega, locus=x * x + y * y, name="spiral")


def regular_circles() -> RegularPresentation:
    V = ("x", "y")
    x, y = Poly.var(V, "x"), Poly.var(V, "y")
    v = VectorField(V, [-y, x])
    omega = DifferentialForm(V, 1, {(0,): x * 2, (1,): y * 2})
    return RegularPresentation([v], [omega], omega, locus=x * x + y * y, name="circles")


def spherical_volume_form(variables: Sequence[str]) -> DifferentialForm:
    """sum_i (-1)^(i-1) x_i dx_1 ^ .. (omit i) .. ^ dx_n."""
    V = tuple(variables)
    n = len(V)
    terms = {}
    for i in range(n):
        I = tuple(j for j in range(n) if j != i)
        terms[I] = Poly.var(V, i) * (-1 if i % 2 else 1)
    return DifferentialForm(V, n - 1, terms)


def regular_euler(n: int) -> RegularPresentation:
    """Regular part of the Euler foliation: rays, transverse form omega_{F°}."""
    V = default_variables(n)
    eps = VectorField.euler(V)
    frame = []
    # x_i dx_j - x_j dx_i span the annihilator off the origin
    for i, j in combinations(range(n), 2):
        frame.append(DifferentialForm(V, 1, {(i,): -Poly.var(V, j), (j,): Poly.var(V, i)}))
    q = sum((Poly.var(V, i) ** 2 for i in range(n)), Poly(V))
    return RegularPresentation([eps], frame, spherical_volume_form(V), locus=q, name=f"euler{n}")


def regular_poisson() -> RegularPresentation:
    """Regular part of the Poisson R^3 foliation off the z-axis: 2-dimensional leaves."""
    V = ("x", "y", "z")
    x, y, _ = (Poly.var(V, v) for v in V)
    zero = Poly(V)
    gens = [
        VectorField(V, [zero, zero, x]),
        VectorField(V, [zero, zero, y]),
        VectorField(V, [-x, -y, zero]),
    ]
    omega = DifferentialForm(V, 1, {(0,): y, (1,): -x})
    return RegularPresentation(gens, [omega], omega, locus=x * x + y * y, name="poisson3")


def regular_son(n: int) -> RegularPresentation:
    """Regular part of the so_n foliation: spheres, transverse form d(r^2)/2."""
    V = default_variables(n)
    A = build_son(n)
    omega = DifferentialForm(V, 1, {(i,): Poly.var(V, i) for i in range(n)})
    q = sum((Poly.var(V, i) ** 2 for i in range(n)), Poly(V))
    return RegularPresentation(list(A.anchor), [omega], omega, locus=q, name=f"so{n}")


BUILTINS = {
    "euler": lambda n=2: build_euler(n),
    "poisson3": lambda n=None: build_poisson_r3(),
    "quadratic": lambda n=None: build_quadratic_r2(),
    "gln": lambda n=3: build_gln(n),
    "son": lambda n=3: build_son(n),
    "son-euler": lambda n=3: direct_sum(build_son(n), build_euler(n)),
    "son-euler-lifted": lambda n=3: direct_sum(build_son(n), build_euler(n), cross_l2=son_euler_lifted_cross(n)),
    "flat-field": lambda n=None: build_contrast_flat(),
    "radial-x1": lambda n=None: build_contrast_radial(),
}

REGULAR_BUILTINS = {
    "spiral": lambda n=None: regular_spiral(),
    "circles": lambda n=None: regular_circles(),
    "euler-regular": lambda n=2: regular_euler(n),
    "poisson-regular": lambda n=None: regular_poisson(),
    "son-regular": lambda n=3: regular_son(n),
}
