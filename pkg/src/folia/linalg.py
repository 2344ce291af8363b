"""Sparse exact Gaussian elimination over Fraction.

Rows are dicts ``column -> Fraction``.  Small and plain on purpose; the
systems here have a few thousand unknowns at most.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping


class _Echelon:
    """Incrementally maintained reduced row echelon form."""

    def __init__(self):
        self.pivots: dict = {}  # pivot column -> row (pivot entry 1)

    def reduce(self, row: Mapping) -> dict:
        r = {c: Fraction(v) for c, v in row.items() if v}
        # pivot rows are fully reduced, so one pass over pivot columns suffices
        for c in [c for c in r if c in self.pivots]:
            v = r.get(c)
            if not v:
                continue
            for cc, pv in self.pivots[c].items():
                nv = r.get(cc, 0) - v * pv
                if nv:
                    r[cc] = nv
                else:
                    r.pop(cc, None)
        return r

    def add(self, row: Mapping, key=None) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        p = min(r, key=key) if key else min(r)
        inv = 1 / r[p]
        r = {c: v * inv for c, v in r.items()}
        for q, prow in self.pivots.items():
            v = prow.get(p)
            if v:
                for cc, pv in r.items():
                    nv = prow.get(cc, 0) - v * pv
                    if nv:
                        prow[cc] = nv
                    else:
                        prow.pop(cc, None)
        self.pivots[p] = r
        return True


def rank(rows: Iterable[Mapping]) -> int:
    ech = _Echelon()
    return sum(1 for r in rows if ech.add(r))


def solve(rows: Iterable[Mapping], rhs: Iterable) -> dict | None:
    """Any solution x of rows . x = rhs (free unknowns set to 0), or None."""
    RHS = object()
    ech = _Echelon()
    # the augmented column must never become a pivot while a real column is available
    key = lambda c: (c is RHS, 0 if c is RHS else c)
    for row, b in zip(rows, rhs):
        aug = dict(row)
        if b:
            aug[RHS] = Fraction(b)
        ech.add(aug, key=key)
    if RHS in ech.pivots:
        return None
    return {p: r[RHS] for p, r in ech.pivots.items() if r.get(RHS)}
