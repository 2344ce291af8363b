"""Lie n-algebroids with polynomial coefficients and their structure checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from . import linalg
from .graded import GradedBundle, Section, koszul_sign, transposition_sign, unshuffles
from .polycore import Poly, VectorField, apply_vf, lie_bracket, monomials


class MissingBracket(LookupError):
    """A bracket entry needed by a computation was never declared."""

    def __init__(self, entry: tuple, labels: tuple = ()):
        self.entry = entry
        self.labels = labels
        name = ", ".join(labels) if labels else str(entry)
        super().__init__(f"undeclared bracket l{len(entry)}({name})")


class NonHomogeneous(ValueError):
    pass


@dataclass(frozen=True)
class Unchecked:
    """Result of a check that needed undeclared brackets."""

    missing: tuple

    def __bool__(self):
        return False


@dataclass(frozen=True)
class NotInImage:
    degree_bound: int


Basis = tuple  # (degree, index)


def _sort_key(b: Basis) -> tuple:
    return (-b[0], b[1])


class LieNAlgebroid:
    """Free Lie n-algebroid over R^n with partial bracket tables.

    ``anchor[j]`` is rho(e_j) for the degree-0 basis.  ``l1[i][j]`` is the
    image of the j-th basis element of E_-i (i >= 1) in E_-(i-1).  ``l2`` and
    ``l3`` map canonically ordered tuples of basis pairs ``(degree, index)``
    to Sections; tuples missing from the tables are undeclared unless the
    degrees force the bracket to vanish.
    """

    def __init__(
        self,
        variables: Sequence[str],
        bundle: GradedBundle,
        anchor: Sequence[VectorField],
        l1: Mapping[int, Sequence[Section]] | None = None,
        l2: Mapping[tuple, Section] | None = None,
        l3: Mapping[tuple, Section] | None = None,
        name: str = "",
    ):
        self.variables = tuple(variables)
        self.bundle = bundle
        self.name = name
        if len(anchor) != bundle.rank(0):
            raise ValueError("anchor needs one vector field per degree-0 basis element")
        for X in anchor:
            if X.variables != self.variables:
                raise ValueError("anchor field variables differ")
        self.anchor = tuple(anchor)
        self.l1 = {}
        for i in range(1, bundle.depth):
            imgs = list((l1 or {}).get(i, []))
            if len(imgs) != bundle.rank(-i):
                raise ValueError(f"l1 on E_-{i} needs {bundle.rank(-i)} images")
            for s in imgs:
                if not s.is_zero() and s.degree != -i + 1:
                    raise ValueError(f"l1 image of E_-{i} must have degree {-i + 1}")
                self._check_section(s)
            self.l1[i] = tuple(imgs)
        self.l2 = {}
        self.l3 = {}
        for k, table, dest in ((2, l2, self.l2), (3, l3, self.l3)):
            for key, val in (table or {}).items():
                key = tuple(tuple(b) for b in key)
                if len(key) != k:
                    raise ValueError(f"l{k} key {key} has wrong arity")
                for b in key:
                    if not (bundle.has_degree(b[0]) and 0 <= b[1] < bundle.rank(b[0])):
                        raise ValueError(f"l{k} key {key} names an unknown basis element")
                ckey, sign = self._canonical(key)
                if sign == 0:
                    if not val.is_zero():
                        raise ValueError(f"l{k}{key} must vanish by graded antisymmetry")
                    continue
                val = val.scale(sign) if sign != 1 else val
                want = sum(b[0] for b in key) + 2 - k
                if not val.is_zero() and val.degree != want:
                    raise ValueError(f"l{k}{key} must land in degree {want}")
                self._check_section(val)
                if ckey in dest and dest[ckey] != val:
                    raise ValueError(f"inconsistent duplicate entry for l{k}{key}")
                dest[ckey] = val

    def _check_section(self, s: Section):
        if s.variables != self.variables:
            raise ValueError("section variables differ from algebroid variables")
        for j in s.coeffs:
            if not 0 <= j < self.bundle.rank(s.degree):
                raise ValueError(f"section index {j} out of range in degree {s.degree}")

    @staticmethod
    def _canonical(key: tuple) -> tuple:
        """(sorted key, sign) with sign 0 when graded antisymmetry forces zero."""
        order = sorted(range(len(key)), key=lambda p: _sort_key(key[p]))
        ckey = tuple(key[p] for p in order)
        degs = [b[0] for b in key]
        # l(key) = eps * l(ckey) where eps is the sign of reordering key into ckey
        sign = koszul_sign(order, degs)
        for a, b in zip(ckey, ckey[1:]):
            if a == b and transposition_sign(a[0], a[0]) == -1:
                return ckey, 0
        return ckey, sign

    # --- basic data -----------------------------------------------------
    @property
    def depth(self) -> int:
        return self.bundle.depth

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def zero(self, degree: int) -> Section:
        return Section(self.variables, min(degree, 0))

    def basis(self, degree: int, index: int) -> Section:
        return Section.basis(self.variables, degree, index)

    def basis_elements(self, degree: int | None = None) -> list:
        degs = [degree] if degree is not None else [-i for i in range(self.depth)]
        return [(d, j) for d in degs for j in range(self.bundle.rank(d))]

    def labels_of(self, entry: tuple) -> tuple:
        return tuple(self.bundle.label(*b) for b in entry)

    def in_range(self, degree: int) -> bool:
        return self.bundle.has_degree(degree)

    def rho(self, s: Section) -> VectorField:
        out = VectorField.zero(self.variables)
        if s.degree != 0:
            return out
        for j, f in s.coeffs.items():
            out = out + self.anchor[j].scale(f)
        return out

    def is_declared(self, entry: tuple) -> bool:
        k = len(entry)
        out = sum(b[0] for b in entry) + 2 - k
        if out > 0 or not self.in_range(out):
            return True
        ckey, sign = self._canonical(entry)
        if sign == 0:
            return True
        if k == 2:
            return ckey in self.l2
        if k == 3:
            return ckey in self.l3
        return False

    def bracket_entry(self, entry: tuple) -> Section:
        """l_k on constant basis elements, with structural zeros and sign conversion."""
        k = len(entry)
        out = sum(b[0] for b in entry) + 2 - k
        if out > 0 or not self.in_range(out):
            return self.zero(out)
        if k == 1:
            d, j = entry[0]
            return self.l1[-d][j] if d < 0 else self.zero(1)
        ckey, sign = self._canonical(entry)
        if sign == 0:
            return self.zero(out)
        table = {2: self.l2, 3: self.l3}.get(k)
        if table is None or ckey not in table:
            raise MissingBracket(ckey, self.labels_of(ckey))
        val = table[ckey]
        return val if sign == 1 else val.scale(sign)

    # --- brackets on sections ------------------------------------------
    def l1_of(self, s: Section) -> Section:
        if s.degree == 0 or s.is_zero():
            return self.zero(s.degree + 1)
        out = self.zero(s.degree + 1)
        for j, f in s.coeffs.items():
            out = out + self.l1[-s.degree][j].scale(f)
        return out

    def l2_of(self, s: Section, t: Section) -> Section:
        """l2 extended by the Leibniz rule in each degree-0 slot."""
        out = self.zero(s.degree + t.degree)
        if s.is_zero() or t.is_zero():
            return out
        sgn = 1 if (s.degree * t.degree) % 2 == 0 else -1
        for i, f in s.coeffs.items():
            for j, g in t.coeffs.items():
                val = self.bracket_entry(((s.degree, i), (t.degree, j)))
                if not val.is_zero():
                    out = out + val.scale(f * g)
                if s.degree == 0:
                    dg = apply_vf(self.anchor[i], g)
                    if dg:
                        out = out + Section(self.variables, t.degree, {j: f * dg})
                if t.degree == 0:
                    df = apply_vf(self.anchor[j], f)
                    if df:
                        out = out + Section(self.variables, s.degree, {i: -sgn * g * df})
        return out

    def lk_of(self, args: Sequence[Section]) -> Section:
        """l_k on sections; C-infinity multilinear for k != 2."""
        k = len(args)
        if k == 1:
            return self.l1_of(args[0])
        if k == 2:
            return self.l2_of(args[0], args[1])
        out_deg = sum(a.degree for a in args) + 2 - k
        out = self.zero(out_deg)
        if any(a.is_zero() for a in args):
            return out
        if out_deg > 0 or not self.in_range(out_deg):
            return out
        terms = [(((), Poly.const(self.variables, 1)))]
        for a in args:
            terms = [
                (key + ((a.degree, j),), c * f)
                for key, c in terms
                for j, f in a.coeffs.items()
            ]
        for key, c in terms:
            val = self.bracket_entry(key)
            if not val.is_zero():
                out = out + val.scale(c)
        return out

    def __repr__(self):
        return f"LieNAlgebroid({self.name or 'unnamed'}, ranks={self.bundle.ranks}, vars={self.variables})"


# --- structure checks ---------------------------------------------------

def leibniz_l2(A: LieNAlgebroid, a: Section, b: Section) -> Section:
    """l2(a, b) with the anchor acting on coefficients in degree-0 slots."""
    return A.l2_of(a, b)


def jacobi_residual(A: LieNAlgebroid, k: int, entry: Sequence[Basis]):
    """Left side of the arity-k higher Jacobi identity on basis elements.

    Returns the residual Section (zero means the identity holds) or an
    Unchecked value naming the first undeclared bracket encountered.
    """
    entry = tuple(tuple(b) for b in entry)
    if len(entry) != k:
        raise ValueError("entry length must equal the arity")
    degs = [b[0] for b in entry]
    secs = [A.basis(*b) for b in entry]
    out_deg = sum(degs) + 3 - k
    total = A.zero(out_deg)
    try:
        for j in range(1, k + 1):
            outer = k - j + 1
            sj = -1 if (j * (k - j)) % 2 else 1
            for u in unshuffles(j, k):
                perm = u.perm
                eps = koszul_sign(perm, degs)
                inner = A.lk_of([secs[p] for p in perm[:j]])
                if inner.is_zero():
                    continue
                rest = [secs[p] for p in perm[j:]]
                val = A.lk_of([inner] + rest)
                if not val.is_zero():
                    total = total + val.scale(sj * eps)
    except MissingBracket as exc:
        return Unchecked((exc.labels or exc.entry,))
    return total


def anchor_morphism_check(A: LieNAlgebroid, a: int, b: int) -> VectorField:
    """rho(l2(a, b)) - [rho(a), rho(b)] for degree-0 basis indices."""
    val = A.bracket_entry(((0, a), (0, b)))
    return A.rho(val) - lie_bracket(A.anchor[a], A.anchor[b])


@dataclass
class CheckReport:
    passed: bool
    failures: list = field(default_factory=list)
    unchecked: list = field(default_factory=list)
    checked: int = 0


def complex_check(A: LieNAlgebroid) -> CheckReport:
    """l1 o l1 = 0 and rho o l1 = 0 on every basis element."""
    rep = CheckReport(True)
    for i in range(1, A.depth):
        for j in range(A.bundle.rank(-i)):
            img = A.l1[i][j]
            lab = A.bundle.label(-i, j)
            rep.checked += 1
            if i == 1:
                r = A.rho(img)
                if not r.is_zero():
                    rep.failures.append(f"rho(l1({lab})) = {r.to_str()}")
            else:
                r = A.l1_of(img)
                if not r.is_zero():
                    rep.failures.append(f"l1(l1({lab})) = {r.to_str(A.bundle)}")
    rep.passed = not rep.failures
    return rep


def anchor_sweep(A: LieNAlgebroid) -> CheckReport:
    rep = CheckReport(True)
    r0 = A.bundle.rank(0)
    for a in range(r0):
        for b in range(a, r0):
            lab = A.labels_of(((0, a), (0, b)))
            try:
                res = anchor_morphism_check(A, a, b)
            except MissingBracket:
                rep.unchecked.append(f"rho-morphism({', '.join(lab)})")
                continue
            rep.checked += 1
            if not res.is_zero():
                rep.failures.append(f"rho(l2({', '.join(lab)})) - [rho, rho] = {res.to_str()}")
    rep.passed = not rep.failures
    return rep


def jacobi_sweep(A: LieNAlgebroid, kmax: int = 3) -> CheckReport:
    """Run jacobi_residual on every multiset of basis elements for k = 1..kmax."""
    rep = CheckReport(True)
    basis = A.basis_elements()
    for k in range(1, kmax + 1):
        for entry in combinations_with_replacement(basis, k):
            # the residual lands in degree sum + 3 - k; skip tuples where it cannot live
            out_deg = sum(b[0] for b in entry) + 3 - k
            if out_deg > 0 or not A.in_range(out_deg):
                continue
            if k == 1 and entry[0][0] == 0:
                continue
            res = jacobi_residual(A, k, entry)
            lab = ", ".join(A.labels_of(entry))
            if isinstance(res, Unchecked):
                rep.unchecked.append(f"J{k}({lab})")
                continue
            rep.checked += 1
            if not res.is_zero():
                rep.failures.append(f"J{k}({lab}) = {res.to_str(A.bundle)}")
    rep.passed = not rep.failures
    return rep


# --- degree-sliced exactness -------------------------------------------

def _map_degree(images: Sequence, what: str):
    """Common total degree of every nonzero coefficient; None for the zero map."""
    degs = set()
    for img in images:
        coeffs = img.components if isinstance(img, VectorField) else img.coeffs.values()
        for c in coeffs:
            if c:
                d = c.homogeneous_degree()
                if d is None:
                    raise NonHomogeneous(f"{what} has a non-homogeneous entry {c.to_str()}")
                degs.add(d)
    if len(degs) > 1:
        raise NonHomogeneous(f"{what} mixes coefficient degrees {sorted(degs)}")
    return degs.pop() if degs else None


def _slice_rows(images: Sequence, n_target: int, nvars: int, variables, d: int) -> list:
    """Matrix columns of a coefficient-linear map on the degree-d slice, as row dicts.

    Source unknowns are (basis index, monomial); target equations are
    (target index, monomial).
    """
    cols = []
    for j, img in enumerate(images):
        coeffs = (
            dict(enumerate(img.components)) if isinstance(img, VectorField) else img.coeffs
        )
        for m in monomials(nvars, d):
            col = {}
            for t, c in coeffs.items():
                for e, v in c.terms.items():
                    key = (t, tuple(a + b for a, b in zip(e, m)))
                    col[key] = col.get(key, 0) + v
            cols.append({k: v for k, v in col.items() if v})
    return cols


@dataclass
class SliceResult:
    position: int
    degree: int
    kernel_dim: int
    image_dim: int

    @property
    def exact(self) -> bool:
        return self.kernel_dim == self.image_dim


@dataclass
class ExactnessReport:
    bound: int
    slices: list
    is_complex: bool = True  # equal dimensions only mean exactness for a complex

    @property
    def passed(self) -> bool:
        return self.is_complex and all(s.exact for s in self.slices)

    def exact_at(self, position: int) -> bool:
        return self.is_complex and all(s.exact for s in self.slices if s.position == position)

    def failures(self) -> list:
        return [s for s in self.slices if not s.exact]


def sliced_exactness(A: LieNAlgebroid, D: int) -> ExactnessReport:
    """Exactness of 0 <- TM <- E_0 <- E_-1 <- ... on polynomial-degree slices.

    At position i the outgoing map is rho (i = 0) or l1, and the incoming map
    is l1 from E_-(i+1) (zero at the bottom).  Each map must be homogeneous of
    one coefficient degree; kernels and images are compared slice by slice
    through degree D using exact ranks.
    """
    if D < 0:
        raise ValueError("degree bound must be non-negative")
    n = A.nvars
    maps = {0: (list(A.anchor), "anchor")}
    for i in range(1, A.depth):
        maps[i] = (list(A.l1[i]), f"l1 on E_-{i}")
    degs = {i: _map_degree(imgs, what) for i, (imgs, what) in maps.items()}
    slices = []
    for i in range(A.depth):
        r = A.bundle.rank(-i)
        out_imgs = maps[i][0]
        for d in range(D + 1):
            dim = r * len(monomials(n, d))
            if degs[i] is None:
                ker = dim
            else:
                ker = dim - _rank_of_columns(_slice_rows(out_imgs, 0, n, A.variables, d))
            img = 0
            if i + 1 < A.depth and degs[i + 1] is not None:
                src = d - degs[i + 1]
                if src >= 0:
                    img = _rank_of_columns(_slice_rows(maps[i + 1][0], 0, n, A.variables, src))
            slices.append(SliceResult(i, d, ker, img))
    return ExactnessReport(D, slices, complex_check(A).passed)


def _rank_of_columns(cols: list) -> int:
    # rank of a matrix equals the rank of its transpose, so columns serve as rows
    return linalg.rank(cols)


# --- forms of form-degree <= 1 -------------------------------------------

@dataclass(frozen=True)
class EForm:
    """Form of degree 0 (a Poly) or 1 (values on the degree-0 basis)."""

    degree: int
    value: object

    @classmethod
    def one_form(cls, values: Mapping[int, Poly]):
        return cls(1, dict(values))

    def on(self, s: Section) -> Poly:
        if self.degree != 1:
            raise ValueError("only 1-forms pair with sections")
        out = Poly(s.variables)
        if s.degree != 0:
            return out
        for j, f in s.coeffs.items():
            v = self.value.get(j)
            if v:
                out = out + f * v
        return out


def d0_on_oneform(A: LieNAlgebroid, theta: EForm) -> dict:
    """u -> theta(l1 u) on the E_-1 basis; empty for depth 1."""
    if A.depth < 2:
        return {}
    return {j: theta.on(A.l1[1][j]) for j in range(A.bundle.rank(-1))}


def d1_on_oneform(A: LieNAlgebroid, theta: EForm, a: int, b: int) -> Poly:
    """rho(a) theta(b) - rho(b) theta(a) - theta(l2(a, b))."""
    ta = theta.value.get(a, Poly(A.variables))
    tb = theta.value.get(b, Poly(A.variables))
    br = A.bracket_entry(((0, a), (0, b)))
    return apply_vf(A.anchor[a], tb) - apply_vf(A.anchor[b], ta) - theta.on(br)


def lift_vector_field(A: LieNAlgebroid, X: VectorField, D: int):
    """Degree-0 section a with rho(a) = X and coefficients of degree <= D."""
    if D < 0:
        raise ValueError("degree bound must be non-negative")
    n = A.nvars
    unknowns = [(j, m) for j in range(A.bundle.rank(0)) for d in range(D + 1) for m in monomials(n, d)]
    eqs: dict = {}
    for u, (j, m) in enumerate(unknowns):
        for comp, c in enumerate(A.anchor[j].components):
            for e, v in c.terms.items():
                key = (comp, tuple(a + b for a, b in zip(e, m)))
                eqs.setdefault(key, {})[u] = eqs.setdefault(key, {}).get(u, 0) + v
    rhs_keys = {(comp, e) for comp, c in enumerate(X.components) for e in c.terms}
    keys = sorted(set(eqs) | rhs_keys)
    rows = [eqs.get(k, {}) for k in keys]
    rhs = [X.components[k[0]].coefficient(k[1]) for k in keys]
    sol = linalg.solve(rows, rhs)
    if sol is None:
        return NotInImage(D)
    coeffs: dict = {}
    for u, v in sol.items():
        j, m = unknowns[u]
        coeffs[j] = coeffs.get(j, Poly(A.variables)) + Poly.monomial(A.variables, m, v)
    return Section(A.variables, 0, coeffs)
