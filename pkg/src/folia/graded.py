"""Graded bundle bookkeeping: labels, sections, Koszul signs, unshuffles, wedge words."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .polycore import Poly


class GradedBundle:
    """Free graded bundle E_0, E_-1, ..., E_-(depth-1) with labelled bases.

    ``labels[i]`` lists the basis labels of E_-i.
    """

    __slots__ = ("labels", "_where")

    def __init__(self, labels: Sequence[Sequence[str]]):
        self.labels = tuple(tuple(ls) for ls in labels)
        if not self.labels:
            raise ValueError("a graded bundle needs depth >= 1")
        self._where = {}
        for i, ls in enumerate(self.labels):
            if not ls:
                raise ValueError(f"rank of E_-{i} must be positive")
            if len(set(ls)) != len(ls):
                raise ValueError(f"duplicate labels in E_-{i}")
            for j, lab in enumerate(ls):
                if lab in self._where:
                    raise ValueError(f"label {lab!r} used twice")
                self._where[lab] = (-i, j)

    @property
    def depth(self) -> int:
        return len(self.labels)

    @property
    def ranks(self) -> tuple:
        return tuple(len(ls) for ls in self.labels)

    def rank(self, degree: int) -> int:
        return len(self.labels[-degree]) if -degree < self.depth else 0

    def label(self, degree: int, index: int) -> str:
        return self.labels[-degree][index]

    def locate(self, label: str) -> tuple:
        """(degree, index) of a basis label."""
        return self._where[label]

    def all_labels(self) -> list:
        return [lab for ls in self.labels for lab in ls]

    def has_degree(self, degree: int) -> bool:
        return 0 >= degree > -self.depth

    def __eq__(self, other):
        return isinstance(other, GradedBundle) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"GradedBundle(ranks={self.ranks})"


class Section:
    """Element of Gamma(E_degree): basis index -> Poly coefficient."""

    __slots__ = ("variables", "degree", "coeffs")

    def __init__(self, variables: Sequence[str], degree: int, coeffs: Mapping[int, Poly] | None = None):
        if degree > 0:
            raise ValueError("sections live in non-positive degrees")
        self.variables = tuple(variables)
        self.degree = degree
        clean = {}
        for j, c in (coeffs or {}).items():
            if not isinstance(c, Poly):
                c = Poly.const(self.variables, c)
            if c.variables != self.variables:
                raise ValueError("coefficient variables differ")
            if j in clean:
                c = clean[j] + c
            if c:
                clean[j] = c
            else:
                clean.pop(j, None)
        self.coeffs = clean

    @classmethod
    def zero(cls, variables, degree: int):
        return cls(variables, degree)

    @classmethod
    def basis(cls, variables, degree: int, index: int, coef=1):
        return cls(variables, degree, {index: coef})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Section"):
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise ValueError(f"adding sections of degrees {self.degree} and {other.degree}")
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out[j] + c if j in out else c
        return Section(self.variables, self.degree, out)

    def __neg__(self):
        return Section(self.variables, self.degree, {j: -c for j, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "Section":
        return Section(self.variables, self.degree, {j: c * f for j, c in self.coeffs.items()})

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return (self.degree, self.coeffs) == (other.degree, other.coeffs)

    __hash__ = None

    def coefficient(self, index: int) -> Poly:
        return self.coeffs.get(index, Poly(self.variables))

    def to_str(self, bundle: GradedBundle | None = None) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for j in sorted(self.coeffs):
            lab = bundle.label(self.degree, j) if bundle else f"e{self.degree}_{j}"
            parts.append(f"({self.coeffs[j].to_str()})*{lab}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Section(degree={self.degree}, {self.to_str()})"


def transposition_sign(da: int, db: int) -> int:
    """Sign for swapping adjacent elements of degrees da, db (exterior convention)."""
    return -1 if (da * db) % 2 == 0 else 1


def koszul_sign(perm: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of reordering a_0..a_{k-1} into a_perm[0], ..., a_perm[k-1].

    Every pair of elements whose relative order is reversed contributes
    -(-1)^{|a||b|}.
    """
    if len(perm) != len(degrees) or sorted(perm) != list(range(len(perm))):
        raise ValueError("perm must be a permutation matching the degree list")
    s = 1
    for p in range(len(perm)):
        for q in range(p + 1, len(perm)):
            if perm[p] > perm[q]:
                s *= transposition_sign(degrees[perm[p]], degrees[perm[q]])
    return s


@dataclass(frozen=True)
class Unshuffle:
    """A (j, k-j) unshuffle; blocks hold 1-based positions, each ascending."""

    first: tuple
    second: tuple

    @property
    def perm(self) -> tuple:
        """0-based permutation listing first block then second block."""
        return tuple(i - 1 for i in self.first + self.second)


def unshuffles(j: int, k: int) -> list:
    if not 0 <= j <= k:
        raise ValueError("need 0 <= j <= k")
    out = []
    full = range(1, k + 1)
    for first in combinations(full, j):
        rest = tuple(i for i in full if i not in first)
        out.append(Unshuffle(tuple(first), rest))
    return out


@dataclass(frozen=True)
class WedgeWord:
    """Canonically ordered product of basis factors (degree, index).

    Factors sort by descending degree, then ascending index.  With
    ``graded`` set, factors of odd degree commute; otherwise every pair
    anticommutes, which is the convention of the Berezinian factors.
    """

    factors: tuple
    graded: bool = True

    def __len__(self):
        return len(self.factors)


def _swap_sign(a: tuple, b: tuple, graded: bool) -> int:
    return transposition_sign(a[0], b[0]) if graded else -1


def canonicalize(factors: Sequence[tuple], graded: bool = True) -> tuple:
    """(sign, WedgeWord); sign 0 when a self-anticommuting factor repeats."""
    w = list(factors)
    s = 1
    key = lambda f: (-f[0], f[1])
    for i in range(len(w)):
        for j in range(len(w) - 1 - i):
            if key(w[j]) > key(w[j + 1]):
                s *= _swap_sign(w[j], w[j + 1], graded)
                w[j], w[j + 1] = w[j + 1], w[j]
    for a, b in zip(w, w[1:]):
        if a == b and _swap_sign(a, a, graded) == -1:
            return 0, None
    return s, WedgeWord(tuple(w), graded)


def wedge(*words, graded: bool = True) -> tuple:
    """Wedge WedgeWords or raw factor tuples; returns (sign, WedgeWord or None)."""
    factors = []
    for w in words:
        if isinstance(w, WedgeWord):
            factors.extend(w.factors)
        elif w and isinstance(w[0], tuple):
            factors.extend(w)
        else:
            factors.append(tuple(w))
    return canonicalize(factors, graded)


def top_word(degree: int, rank: int, graded: bool = False) -> WedgeWord:
    """e_1 ^ ... ^ e_rank in E_degree."""
    return WedgeWord(tuple((degree, j) for j in range(rank)), graded)
