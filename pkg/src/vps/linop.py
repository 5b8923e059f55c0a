"""Horizontal linear differential operators in D-normal form.

``op.entries[A][a]`` maps a multi-index ``I`` to the coefficient ``c^A_{a,I}``;
the operator sends ``s = (s^a)`` to ``(op s)^A = sum c^A_{a,I} D_I s^a``.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .jetcalc import EvolField, total_derivative_multi
from .symexpr import ONE, ZERO, Expr, mi_add, mi_order, mi_subindices, mi_sub


def _clean(entry: Mapping) -> dict:
    return {tuple(I): c for I, c in entry.items() if c.terms}


class LinDiffOp:
    __slots__ = ("n", "rows", "cols", "entries")

    def __init__(self, n: int, entries: Sequence[Sequence[Mapping]]):
        self.n = n
        self.entries = tuple(tuple(_clean(e) for e in row) for row in entries)
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged operator matrix")
            for e in row:
                for I in e:
                    if len(I) != n:
                        raise ValueError(f"multi-index {I} does not have length {n}")

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int, rows: int, cols: int) -> "LinDiffOp":
        return cls(n, [[{} for _ in range(cols)] for _ in range(rows)])

    @classmethod
    def identity(cls, n: int, size: int) -> "LinDiffOp":
        z = tuple([0] * n)
        return cls(n, [[{z: ONE} if A == a else {} for a in range(size)] for A in range(size)])

    @classmethod
    def scalar(cls, n: int, poly: Mapping) -> "LinDiffOp":
        """1x1 operator from ``{multi_index: coefficient}``."""
        return cls(n, [[{tuple(I): Expr.coerce(c) for I, c in poly.items()}]])

    # algebra -------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return all(not e for row in self.entries for e in row)

    def order(self) -> int:
        return max((mi_order(I) for row in self.entries for e in row for I in e), default=-1)

    def _combine(self, other: "LinDiffOp", sign: int) -> "LinDiffOp":
        if self.shape != other.shape or self.n != other.n:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        rows = []
        for r1, r2 in zip(self.entries, other.entries):
            row = []
            for e1, e2 in zip(r1, r2):
                e = dict(e1)
                for I, c in e2.items():
                    e[I] = e.get(I, ZERO) + (c if sign > 0 else -c)
                row.append(e)
            rows.append(row)
        return LinDiffOp(self.n, rows)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return LinDiffOp(self.n, [[{I: -c for I, c in e.items()} for e in row] for row in self.entries])

    def __eq__(self, other):
        if not isinstance(other, LinDiffOp):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __hash__(self):
        return hash((self.n, tuple(tuple(frozenset(e.items()) for e in row) for row in self.entries)))

    def __repr__(self):
        return f"LinDiffOp{self.shape}({format_op(self)})"

    def transpose_entries(self):
        return [[self.entries[A][a] for A in range(self.rows)] for a in range(self.cols)]


def linearize(phis: Sequence[Expr], n: int, m: int) -> LinDiffOp:
    """Universal linearization: entry ``(a, alpha, I) = d Phi^a / d u^alpha_I``."""
    rows = []
    for phi in phis:
        phi = Expr.coerce(phi)
        row = [dict() for _ in range(m)]
        for k in phi.jet_keys():
            if k[1] >= m:
                raise ValueError(f"expression mentions field #{k[1]} outside the {m} given")
            row[k[1]][k[3]] = phi.partial(k)
        rows.append(row)
    return LinDiffOp(n, rows)


def apply(op: LinDiffOp, s: Sequence) -> tuple:
    if len(s) != op.cols:
        raise ValueError(f"operator takes {op.cols} components, got {len(s)}")
    field = EvolField(s)
    out = []
    for row in op.entries:
        acc = ZERO
        for a, e in enumerate(row):
            for I, c in e.items():
                acc = acc + c * field.prolonged(a, I)
        out.append(acc)
    return tuple(out)


def _expand_leibniz(c: Expr, I: tuple, scale: int, into: dict, shift: tuple | None = None):
    """Accumulate ``scale * D_I(c * .)`` in D-normal form, optionally composed
    on the right with ``D_shift``."""
    for J, binom in mi_subindices(I):
        rest = mi_sub(I, J)
        coeff = total_derivative_multi(c, rest)
        if not coeff.terms:
            continue
        K = J if shift is None else mi_add(J, shift)
        into[K] = into.get(K, ZERO) + coeff * (scale * binom)


def adjoint(op: LinDiffOp) -> LinDiffOp:
    """Formal adjoint: ``(op^+ q)_a = sum (-1)^|I| D_I(c^A_{a,I} q_A)``."""
    rows = []
    for a in range(op.cols):
        row = []
        for A in range(op.rows):
            e: dict = {}
            for I, c in op.entries[A][a].items():
                _expand_leibniz(c, I, -1 if mi_order(I) % 2 else 1, e)
            row.append(e)
        rows.append(row)
    return LinDiffOp(op.n, rows)


def compose(outer: LinDiffOp, inner: LinDiffOp) -> LinDiffOp:
    """``outer o inner`` in D-normal form."""
    if outer.cols != inner.rows:
        raise ValueError(f"cannot compose {outer.shape} after {inner.shape}")
    if outer.n != inner.n:
        raise ValueError("operators on different base dimensions")
    rows = []
    for A in range(outer.rows):
        row = []
        for b in range(inner.cols):
            e: dict = {}
            for a in range(outer.cols):
                for I, c in outer.entries[A][a].items():
                    for J, d in inner.entries[a][b].items():
                        # c D_I (d D_J) = sum_K binom(I,K) c D_{I-K}(d) D_{K+J}
                        for K, binom in mi_subindices(I):
                            coeff = total_derivative_multi(d, mi_sub(I, K))
                            if coeff.terms:
                                KJ = mi_add(K, J)
                                e[KJ] = e.get(KJ, ZERO) + c * coeff * binom
            row.append(e)
        rows.append(row)
    return LinDiffOp(outer.n, rows)


def pairing_density(qdag: Sequence, r: Sequence) -> Expr:
    acc = ZERO
    for a, b in zip(qdag, r):
        acc = acc + Expr.coerce(a) * Expr.coerce(b)
    return acc


def green_remainder(op: LinDiffOp, p: Sequence, qdag: Sequence):
    """(0, n-1)-form ``G`` with ``<q, op p> - <op^+ q, p> = dbar G``."""
    from .jetcalc import BigradedForm
    from .varcalc import split_divergence

    if len(p) != op.cols or len(qdag) != op.rows:
        raise ValueError("argument lengths do not match operator shape")
    lhs = pairing_density(qdag, apply(op, p))
    rhs = pairing_density(apply(adjoint(op), qdag), p)
    return split_divergence(BigradedForm.top(op.n, lhs - rhs))


def is_complex(second: LinDiffOp, first: LinDiffOp) -> bool:
    return compose(second, first).is_zero()


# ----------------------------------------------------------------------------
# printing


def format_entry(e: Mapping, n: int, bundle=None) -> str:
    """``c1*D[t,t] + c2*D[x] + c3``: coefficient times D-monomial, highest order first."""
    from .symexpr import format_expr, mi_letters

    if not e:
        return "0"
    fmt = bundle.format if bundle is not None else format_expr
    names = bundle.independent if bundle is not None else tuple(f"x{i + 1}" for i in range(n))
    parts = []
    for I in sorted(e, key=lambda I: (-mi_order(I), tuple(-x for x in I))):
        c = e[I]
        text = fmt(c)
        if not any(I):
            parts.append(f"({text})")
            continue
        d = f"D[{','.join(names[i] for i in mi_letters(I))}]"
        parts.append(d if text == "1" else f"({text})*{d}")
    return " + ".join(parts)


def format_op(op: LinDiffOp, bundle=None) -> str:
    """Rows joined by ``; ``, entries by ``, `` (the operator-body syntax of model files)."""
    rows = []
    for row in op.entries:
        rows.append(", ".join(format_entry(e, op.n, bundle) for e in row))
    return "; ".join(rows)
