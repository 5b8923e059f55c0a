"""Exact sparse linear solving over the rationals.

Rows are ``{column: Fraction}`` dicts.  Elimination is incremental: each new
equation is reduced against the pivots found so far, so the matrix never has
to be materialised densely.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

RHS = -1  # unknowns are numbered from 0


class Inconsistent(ArithmeticError):
    pass


class SparseSystem:
    def __init__(self):
        self.pivots: dict = {}  # column -> normalised row (pivot coefficient 1)
        self.order: list = []

    def _reduce(self, row: dict) -> dict:
        pivots = self.pivots
        while True:
            hit = [c for c in row if c in pivots]
            if not hit:
                return row
            for col in hit:
                f = row.get(col)
                if not f:
                    continue
                for c2, v in pivots[col].items():
                    nv = row.get(c2, 0) - f * v
                    if nv:
                        row[c2] = nv
                    else:
                        row.pop(c2, None)

    def add(self, row: Mapping, rhs=0) -> None:
        r = {c: Fraction(v) for c, v in row.items() if v}
        if rhs:
            r[RHS] = Fraction(rhs)
        r = self._reduce(r)
        cols = [c for c in r if c != RHS]
        if not cols:
            if r.get(RHS):
                raise Inconsistent("equation 0 = nonzero")
            return
        col = min(cols)
        inv = 1 / r[col]
        self.pivots[col] = {c: v * inv for c, v in r.items()}
        self.order.append(col)

    def solution(self) -> dict:
        """One solution (free variables set to zero)."""
        x: dict = {}
        for col in reversed(self.order):
            row = self.pivots[col]
            val = row.get(RHS, Fraction(0))
            for c, v in row.items():
                if c != col and c != RHS:
                    val -= v * x.get(c, 0)
            if val:
                x[col] = val
        return x


def solve(rows: Iterable[tuple[Mapping, object]]) -> dict:
    """Solve ``sum row[c] x_c = rhs`` for each ``(row, rhs)``; raise Inconsistent."""
    S = SparseSystem()
    for row, rhs in rows:
        S.add(row, rhs)
    return S.solution()
