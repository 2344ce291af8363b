"""Exact polynomials, rational-log expressions, vector fields and forms on R^n.

Everything here is immutable and uses Fraction coefficients only.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence, Union

Number = Union[int, Fraction]


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"expected an exact rational, got {type(c).__name__}")


def _grlex_key(exps: tuple) -> tuple:
    return (sum(exps), exps)


def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Poly:
    """Multivariate polynomial with rational coefficients.

    ``terms`` maps exponent tuples (one entry per variable) to nonzero
    Fractions.  Two polynomials interact only when their variable tuples agree.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, Number] | None = None):
        self.variables = tuple(variables)
        clean = {}
        n = len(self.variables)
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != n:
                raise ValueError(f"exponent {e} does not match {n} variables")
            c = _frac(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, variables):
        return cls(variables)

    @classmethod
    def const(cls, variables, c: Number):
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables, name: str | int):
        variables = tuple(variables)
        i = variables.index(name) if isinstance(name, str) else name
        e = [0] * len(variables)
        e[i] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def monomial(cls, variables, exps: tuple, c: Number = 1):
        return cls(variables, {tuple(exps): c})

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        return Poly.const(self.variables, _frac(other))

    # queries
    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def homogeneous_degree(self) -> int | None:
        """Degree if all terms share one total degree, else None (zero gives None)."""
        degs = {sum(e) for e in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def coefficient(self, exps: tuple) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def leading_term(self) -> tuple:
        return max(self.terms.items(), key=lambda t: _grlex_key(t[0]))

    # arithmetic
    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _frac(other)
            return Poly(self.variables, {e: v * c for e, v in self.terms.items()}) if c else Poly(self.variables)
        if not isinstance(other, Poly):
            return NotImplemented
        other = self._lift(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("Poly powers must be non-negative integers")
        out = Poly.const(self.variables, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.terms == ({} if other == 0 else {(0,) * self.nvars: Fraction(other)})
        if not isinstance(other, Poly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def divexact(self, other: "Poly") -> "Poly | None":
        """Quotient if ``other`` divides ``self`` exactly, else None."""
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        le, lc = other.leading_term()
        rem = self
        q: dict = {}
        while rem.terms:
            e, c = rem.leading_term()
            if any(a < b for a, b in zip(e, le)):
                return None
            m = tuple(a - b for a, b in zip(e, le))
            f = c / lc
            q[m] = q.get(m, 0) + f
            rem = rem - other * Poly.monomial(self.variables, m, f)
        return Poly(self.variables, q)

    def evaluate(self, point: Sequence[Number]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("point length must equal the variable count")
        pt = [_frac(p) for p in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(pt, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def embed(self, variables: Sequence[str]) -> "Poly":
        """Same polynomial in a larger variable tuple containing ours."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.variables]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for i, k in zip(idx, e):
                ne[i] = k
            out[tuple(ne)] = c
        return Poly(variables, out)

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            a = abs(c)
            if not mono:
                body = _fmt_coef(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coef(a)}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    __str__ = to_str

    def __repr__(self):
        return f"Poly({self.to_str()!r})"


def derive(p: Poly, i: int | str) -> Poly:
    """Formal partial derivative of ``p`` in variable ``i`` (index or name)."""
    if isinstance(i, str):
        i = p.variables.index(i)
    if not 0 <= i < p.nvars:
        raise IndexError(f"variable index {i} out of range")
    out = {}
    for e, c in p.terms.items():
        k = e[i]
        if k:
            ne = list(e)
            ne[i] = k - 1
            out[tuple(ne)] = c * k
    return Poly(p.variables, out)


def _small_primes(n: int) -> dict:
    out: dict = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class RatLogExpr:
    """num/den + sum of c*ln(P).

    Log arguments are normalized: a positive leading coefficient is split off
    as a constant log, and constant logs are broken into prime logs.  Negative
    leading coefficients are kept inside the argument.
    """

    __slots__ = ("num", "den", "logs")

    def __init__(self, num: Poly, den: Poly | None = None, logs: Iterable = ()):
        if den is None:
            den = Poly.const(num.variables, 1)
        if den.variables != num.variables:
            raise ValueError("numerator and denominator variables differ")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        lc = den.leading_term()[1]
        if lc != 1:
            num, den = num * (1 / lc), den * (1 / lc)
        if num.is_zero():
            den = Poly.const(num.variables, 1)
        else:
            q = num.divexact(den)
            if q is not None:
                num, den = q, Poly.const(num.variables, 1)
            elif not num.is_constant():
                q = den.divexact(num)
                if q is not None:
                    c = q.leading_term()[1]
                    num, den = Poly.const(num.variables, 1 / c), q * (1 / c)
        self.num = num
        self.den = den
        self.logs = self._normalize_logs(num.variables, logs)

    @staticmethod
    def _normalize_logs(variables, logs) -> tuple:
        acc: dict = {}

        def put(arg: Poly, c: Fraction):
            acc[arg] = acc.get(arg, 0) + c

        for c, arg in logs:
            c = _frac(c)
            if not c:
                continue
            if arg.variables != variables:
                raise ValueError("log argument variables differ")
            if arg.is_zero():
                raise ValueError("log of the zero polynomial")
            lc = arg.leading_term()[1]
            if arg.is_constant():
                if lc < 0:
                    # ln|c| convention for constants; derivative is zero either way
                    lc = -lc
                for p, k in _small_primes(lc.numerator).items():
                    put(Poly.const(variables, p), c * k)
                for p, k in _small_primes(lc.denominator).items():
                    put(Poly.const(variables, p), -c * k)
                continue
            if lc > 0 and lc != 1:
                put(arg * (1 / lc), c)
                for p, k in _small_primes(lc.numerator).items():
                    put(Poly.const(variables, p), c * k)
                for p, k in _small_primes(lc.denominator).items():
                    put(Poly.const(variables, p), -c * k)
            else:
                put(arg, c)
        items = [(c, a) for a, c in acc.items() if c]
        items.sort(key=lambda t: (_poly_sort_key(t[1]), t[0]))
        return tuple(items)

    @classmethod
    def from_poly(cls, p: Poly) -> "RatLogExpr":
        return cls(p)

    @classmethod
    def const(cls, variables, c: Number) -> "RatLogExpr":
        return cls(Poly.const(variables, c))

    @classmethod
    def log(cls, arg: Poly, c: Number = 1) -> "RatLogExpr":
        return cls(Poly(arg.variables), None, [(c, arg)])

    @property
    def variables(self):
        return self.num.variables

    def is_rational(self) -> bool:
        return not self.logs

    def is_poly(self) -> bool:
        return not self.logs and self.den.is_constant()

    def as_poly(self) -> Poly:
        if not self.is_poly():
            raise ValueError("expression is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def is_zero(self) -> bool:
        return self.num.is_zero() and not self.logs

    def _lift(self, other) -> "RatLogExpr":
        if isinstance(other, RatLogExpr):
            return other
        if isinstance(other, Poly):
            return RatLogExpr(other)
        return RatLogExpr.const(self.variables, _frac(other))

    def __add__(self, other):
        o = self._lift(other)
        num = self.num * o.den + o.num * self.den
        return RatLogExpr(num, self.den * o.den, self.logs + o.logs)

    __radd__ = __add__

    def __neg__(self):
        return RatLogExpr(-self.num, self.den, [(-c, a) for c, a in self.logs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        if self.logs and o.logs:
            raise ValueError("product of two log expressions leaves the grammar")
        if self.logs or o.logs:
            lg, r = (self, o) if self.logs else (o, self)
            if not r.is_poly() or not r.as_poly().is_constant():
                raise ValueError("logs may only be scaled by constants")
            k = r.as_poly().constant_value()
            return RatLogExpr(lg.num * k, lg.den, [(c * k, a) for c, a in lg.logs])
        return RatLogExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.logs:
            raise ValueError("division by a log expression leaves the grammar")
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero expression")
        if self.logs:
            if not o.is_poly() or not o.as_poly().is_constant():
                raise ValueError("logs may only be divided by constants")
            k = 1 / o.as_poly().constant_value()
            return self * k
        return RatLogExpr(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("only integer powers are supported")
        if self.logs:
            if k == 1:
                return self
            raise ValueError("powers of log expressions leave the grammar")
        if k >= 0:
            return RatLogExpr(self.num ** k, self.den ** k)
        if self.num.is_zero():
            raise ZeroDivisionError("negative power of zero")
        return RatLogExpr(self.den ** (-k), self.num ** (-k))

    def __eq__(self, other):
        if not isinstance(other, (RatLogExpr, Poly, int, Fraction)):
            return NotImplemented
        o = self._lift(other)
        return (self.num * o.den == o.num * self.den) and self.logs == o.logs

    def __hash__(self):
        return hash((self.logs, self.variables))

    def derive(self, i: int | str) -> "RatLogExpr":
        if isinstance(i, str):
            i = self.variables.index(i)
        out = RatLogExpr(
            derive(self.num, i) * self.den - self.num * derive(self.den, i),
            self.den * self.den,
        )
        for c, a in self.logs:
            da = derive(a, i)
            if da:
                out = out + RatLogExpr(da * c, a)
        return out

    def evaluate(self, point: Sequence[Number]) -> Fraction:
        if self.logs:
            raise ValueError("cannot evaluate log terms exactly")
        d = self.den.evaluate(point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        return self.num.evaluate(point) / d

    def to_str(self) -> str:
        parts = []
        if not self.num.is_zero():
            if self.den.is_constant():
                parts.append(self.as_rational_poly().to_str())
            else:
                parts.append(f"({self.num.to_str()})/({self.den.to_str()})")
        for c, a in self.logs:
            head = "" if c == 1 else "-" if c == -1 else f"{_fmt_coef(c)}*"
            parts.append(f"{head}ln({a.to_str()})")
        if not parts:
            return "0"
        s = parts[0]
        for p in parts[1:]:
            s += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return s

    def as_rational_poly(self) -> Poly:
        return self.num * (1 / self.den.constant_value())

    __str__ = to_str

    def __repr__(self):
        return f"RatLogExpr({self.to_str()!r})"


def _poly_sort_key(p: Poly) -> tuple:
    return tuple((_grlex_key(e), c) for e, c in p.sorted_terms())


def as_expr(f) -> RatLogExpr:
    return f if isinstance(f, RatLogExpr) else RatLogExpr(f)


class VectorField:
    """Polynomial vector field: one component per variable."""

    __slots__ = ("variables", "components")

    def __init__(self, variables: Sequence[str], components: Sequence[Poly]):
        self.variables = tuple(variables)
        comps = []
        for c in components:
            if not isinstance(c, Poly):
                c = Poly.const(self.variables, c)
            if c.variables != self.variables:
                raise ValueError("component variables differ from field variables")
            comps.append(c)
        if len(comps) != len(self.variables):
            raise ValueError("component count must equal variable count")
        self.components = tuple(comps)

    @classmethod
    def zero(cls, variables):
        return cls(variables, [Poly(variables)] * len(variables))

    @classmethod
    def euler(cls, variables):
        return cls(variables, [Poly.var(variables, i) for i in range(len(variables))])

    def __add__(self, other):
        return VectorField(self.variables, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorField(self.variables, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorField(self.variables, [-a for a in self.components])

    def scale(self, f) -> "VectorField":
        return VectorField(self.variables, [f * a for a in self.components])

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.variables == other.variables and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def to_str(self) -> str:
        parts = [f"({c.to_str()})*d_{v}" for c, v in zip(self.components, self.variables) if c]
        return " + ".join(parts) if parts else "0"

    __str__ = to_str

    def __repr__(self):
        return f"VectorField({self.to_str()!r})"


def apply_vf(X: VectorField, f):
    """X[f] = sum_i X^i d_i f, for a Poly or a RatLogExpr."""
    if isinstance(f, Poly):
        out = Poly(f.variables)
        for c, i in zip(X.components, range(len(X.components))):
            if c:
                out = out + c * derive(f, i)
        return out
    if isinstance(f, RatLogExpr):
        out = RatLogExpr(Poly(f.variables))
        for i, c in enumerate(X.components):
            if c:
                out = out + f.derive(i) * c
        return out
    raise TypeError("apply_vf expects a Poly or RatLogExpr")


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    if X.variables != Y.variables:
        raise ValueError("vector fields over different variables")
    return VectorField(
        X.variables,
        [apply_vf(X, b) - apply_vf(Y, a) for a, b in zip(X.components, Y.components)],
    )


def divergence(X: VectorField) -> Poly:
    out = Poly(X.variables)
    for i, c in enumerate(X.components):
        out = out + derive(c, i)
    return out


class DifferentialForm:
    """k-form sum of coefficient * dx_I with I strictly increasing."""

    __slots__ = ("variables", "degree", "terms")

    def __init__(self, variables: Sequence[str], degree: int, terms: Mapping[tuple, object] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        if not 0 <= degree <= n:
            raise ValueError(f"form degree {degree} outside 0..{n}")
        self.degree = degree
        clean: dict = {}
        for idx, c in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index word {idx} must be strictly increasing of length {degree}")
            if not all(0 <= i < n for i in idx):
                raise ValueError(f"index word {idx} out of range")
            c = as_expr(c if not isinstance(c, (int, Fraction)) else Poly.const(self.variables, c))
            if c.variables != self.variables:
                raise ValueError("coefficient variables differ")
            if idx in clean:
                c = clean[idx] + c
            if c.is_zero():
                clean.pop(idx, None)
            else:
                clean[idx] = c
        self.terms = clean

    @classmethod
    def volume(cls, variables):
        return cls(variables, len(variables), {tuple(range(len(variables))): 1})

    @classmethod
    def differential(cls, variables, i: int | str):
        variables = tuple(variables)
        if isinstance(i, str):
            i = variables.index(i)
        return cls(variables, 1, {(i,): 1})

    def _same(self, other):
        if other.variables != self.variables or other.degree != self.degree:
            raise ValueError("forms differ in variables or degree")

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return DifferentialForm(self.variables, self.degree, out)

    def __neg__(self):
        return DifferentialForm(self.variables, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "DifferentialForm":
        f = as_expr(f) if not isinstance(f, (int, Fraction)) else RatLogExpr.const(self.variables, f)
        return DifferentialForm(self.variables, self.degree, {k: f * v for k, v in self.terms.items()})

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        out: dict = {}
        for I, a in self.terms.items():
            for J, b in other.terms.items():
                if set(I) & set(J):
                    continue
                word = list(I + J)
                s = _sort_sign(word)
                key = tuple(sorted(word))
                v = a * b * s
                out[key] = out[key] + v if key in out else v
        return DifferentialForm(self.variables, self.degree + other.degree, out)

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if (self.variables, self.degree) != (other.variables, other.degree):
            return False
        keys = set(self.terms) | set(other.terms)
        zero = RatLogExpr(Poly(self.variables))
        return all(self.terms.get(k, zero) == other.terms.get(k, zero) for k in keys)

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for I in sorted(self.terms):
            w = "/\\".join(f"d{self.variables[i]}" for i in I) or "1"
            parts.append(f"({self.terms[I].to_str()})*{w}")
        return " + ".join(parts)

    __str__ = to_str

    def __repr__(self):
        return f"DifferentialForm({self.to_str()!r})"


def _sort_sign(word: list) -> int:
    """Sign of the permutation sorting ``word`` (distinct entries)."""
    s = 1
    w = list(word)
    for i in range(len(w)):
        for j in range(len(w) - 1 - i):
            if w[j] > w[j + 1]:
                w[j], w[j + 1] = w[j + 1], w[j]
                s = -s
    return s


def exterior_derivative(eta: DifferentialForm) -> DifferentialForm:
    n = len(eta.variables)
    if eta.degree >= n:
        return DifferentialForm(eta.variables, n, {})
    out: dict = {}
    for I, c in eta.terms.items():
        for i in range(n):
            if i in I:
                continue
            dc = c.derive(i)
            if dc.is_zero():
                continue
            # dx_i moves past every index below it
            pos = sum(1 for j in I if j < i)
            key = tuple(sorted(I + (i,)))
            v = dc if pos % 2 == 0 else -dc
            out[key] = out[key] + v if key in out else v
    return DifferentialForm(eta.variables, eta.degree + 1, out)


def interior_product(X: VectorField, eta: DifferentialForm) -> DifferentialForm:
    if eta.degree < 1:
        raise ValueError("interior product needs a form of degree >= 1")
    out: dict = {}
    for I, c in eta.terms.items():
        for pos, i in enumerate(I):
            xi = X.components[i]
            if not xi:
                continue
            key = I[:pos] + I[pos + 1:]
            v = c * xi
            if pos % 2:
                v = -v
            out[key] = out[key] + v if key in out else v
    return DifferentialForm(eta.variables, eta.degree - 1, out)


def evaluate_at(f, point: Sequence[Number]):
    """Exact substitution into a Poly, RatLogExpr (no logs) or VectorField."""
    if isinstance(f, VectorField):
        return tuple(c.evaluate(point) for c in f.components)
    return f.evaluate(point)


def index_words(n: int, k: int) -> list:
    return list(combinations(range(n), k))


def monomials(n: int, d: int) -> list:
    """Exponent tuples in n variables of total degree exactly d, grlex descending."""
    if n == 0:
        return [()] if d == 0 else []
    out = []
    for k in range(d, -1, -1):
        for rest in monomials(n - 1, d - k):
            out.append((k,) + rest)
    return out
