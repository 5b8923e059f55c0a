"""Total derivatives and the variational bicomplex in jet coordinates.

Convention sheet
----------------
* A form is stored as a sum of ``f * w_{K1} ^ ... ^ w_{Kp} ^ dx^{i1} ^ ... ^ dx^{iq}``:
  contact factors first (sorted by jet key), then horizontal factors
  (increasing), each reordering paid for with its parity sign.
* ``w^a_I = du^a_I - u^a_{Ii} dx^i`` and ``d = dbar + dvert`` with ``d^2 = 0``, so
  the two differentials anticommute and ``dbar w^a_I = -w^a_{Ii} ^ dx^i``.
  Consequently ``dbar(F) = (-1)^p sum_i Dhat_i(F) ^ dx^i`` where ``Dhat_i``
  differentiates the coefficient and shifts contact labels.
* Contraction with an evolutionary field is an odd derivation of total degree
  -1: ``i(w^b_J) = D_J chi^b``, ``i(dx^i) = 0``.  It anticommutes with both
  differentials; ``lie = i dvert + dvert i`` commutes with both.
* The pairing of a source section with a generating section is
  ``i_chi(phi_a w^a ^ d^n x) = phi_a chi^a d^n x``.
* ``iota(i)`` denotes the (n-1)-form with ``dx^i ^ iota(i) = d^n x``.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .symexpr import (
    BASE,
    JET,
    ONE,
    ZERO,
    Expr,
    jet_key,
    mi_letters,
)

# ----------------------------------------------------------------------------
# total derivatives


def _shift(k: tuple, i: int) -> tuple:
    counts = list(k[3])
    counts[i] += 1
    return (JET, k[1], k[2] + 1, tuple(counts))


def total_derivative(e: Expr, i: int) -> Expr:
    """``D_i e = de/dx^i + u^a_{Ii} de/du^a_I``."""

    def d_atom(k):
        if k[0] == JET:
            return Expr.atom(_shift(k, i))
        if k[0] == BASE and k[1] == i:
            return ONE
        return None

    return e.derive(d_atom)


def total_derivative_multi(e: Expr, counts: Sequence[int]) -> Expr:
    for i in mi_letters(tuple(counts)):
        e = total_derivative(e, i)
    return e


class EvolField:
    """Generating section ``chi = (chi^1, ..., chi^m)`` of an evolutionary field.

    Components beyond the given tuple are zero, which lets a field written for
    a bundle act on an extension of it.
    """

    __slots__ = ("components", "_cache")

    def __init__(self, components: Iterable):
        self.components = tuple(Expr.coerce(c) for c in components)
        self._cache: dict = {}

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        return isinstance(other, EvolField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"EvolField({list(self.components)})"

    def prolonged(self, alpha: int, counts: tuple) -> Expr:
        """``D_I chi^alpha`` (memoised)."""
        key = (alpha, counts)
        out = self._cache.get(key)
        if out is None:
            if alpha >= len(self.components):
                out = ZERO
            elif not any(counts):
                out = self.components[alpha]
            else:
                letters = mi_letters(counts)
                prev = list(counts)
                prev[letters[-1]] -= 1
                out = total_derivative(self.prolonged(alpha, tuple(prev)), letters[-1])
            self._cache[key] = out
        return out

    def act(self, e: Expr) -> Expr:
        """Prolonged action ``E_chi(e) = sum D_I chi^a d e / d u^a_I``."""
        return e.derive(lambda k: self.prolonged(k[1], k[3]) if k[0] == JET else None)


# ----------------------------------------------------------------------------
# bigraded forms


def _sort_sign(seq: Sequence) -> tuple[int, tuple | None]:
    """Sort an anticommuting product; return ``(sign, sorted)`` or ``(0, None)``."""
    items = list(seq)
    sign = 1
    # insertion sort, counting transpositions
    for a in range(1, len(items)):
        b = a
        while b > 0 and items[b - 1] > items[b]:
            items[b - 1], items[b] = items[b], items[b - 1]
            sign = -sign
            b -= 1
    for a in range(1, len(items)):
        if items[a] == items[a - 1]:
            return 0, None
    return sign, tuple(items)


class BigradedForm:
    """Element of ``C^p Lambda^p (x) Lambda-bar^q`` on the jet space.

    ``terms`` maps ``(contact_keys, horizontal_indices)`` to a nonzero Expr.
    """

    __slots__ = ("n", "p", "q", "terms")

    def __init__(self, n: int, p: int, q: int, terms: Mapping | None = None):
        # q = n + 1 is admitted as the (always zero) target of dbar on top forms
        if not 0 <= q <= n + 1 or p < 0:
            raise ValueError(f"bidegree ({p}, {q}) impossible with n = {n}")
        self.n, self.p, self.q = n, p, q
        self.terms = {b: c for b, c in (terms or {}).items() if c.terms}

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int, p: int, q: int) -> "BigradedForm":
        return cls(n, p, q)

    @classmethod
    def function(cls, n: int, f) -> "BigradedForm":
        return cls(n, 0, 0, {((), ()): Expr.coerce(f)})

    @classmethod
    def top(cls, n: int, f) -> "BigradedForm":
        """``f d^n x``."""
        return cls(n, 0, n, {((), tuple(range(n))): Expr.coerce(f)})

    @classmethod
    def build(cls, n: int, p: int, q: int, pieces: Iterable) -> "BigradedForm":
        """Assemble from ``(coeff, contact_keys, horizontal)`` triples in any order."""
        acc: dict = {}
        for coeff, contact, horiz in pieces:
            coeff = Expr.coerce(coeff)
            if not coeff.terms:
                continue
            if len(contact) != p or len(horiz) != q:
                raise ValueError("factor count does not match bidegree")
            s1, c = _sort_sign(contact)
            s2, h = _sort_sign(horiz)
            if not s1 * s2:
                continue
            b = (c, h)
            acc[b] = acc.get(b, ZERO) + (coeff if s1 * s2 == 1 else -coeff)
        return cls(n, p, q, acc)

    @classmethod
    def contact(cls, n: int, alpha: int, counts: tuple) -> "BigradedForm":
        return cls(n, 1, 0, {((jet_key(alpha, counts),), ()): ONE})

    @classmethod
    def dx(cls, n: int, i: int) -> "BigradedForm":
        return cls(n, 0, 1, {((), (i,)): ONE})

    @classmethod
    def iota_top(cls, n: int, i: int, f=ONE) -> "BigradedForm":
        """``f iota(i)`` with ``dx^i ^ iota(i) = d^n x``."""
        rest = tuple(j for j in range(n) if j != i)
        sign = -1 if i % 2 else 1
        return cls(n, 0, n - 1, {((), rest): Expr.coerce(f) * sign})

    @classmethod
    def source(cls, n: int, components: Sequence) -> "BigradedForm":
        """Embed a source section ``phi_a`` as ``phi_a w^a ^ d^n x``."""
        zero = tuple([0] * n)
        return cls.build(
            n, 1, n,
            ((Expr.coerce(c), (jet_key(a, zero),), tuple(range(n))) for a, c in enumerate(components)),
        )

    # algebra -------------------------------------------------------------
    @property
    def bidegree(self) -> tuple[int, int]:
        return (self.p, self.q)

    def is_zero(self) -> bool:
        return not self.terms

    def _like(self, other: "BigradedForm"):
        if (self.n, self.p, self.q) != (other.n, other.p, other.q):
            raise ValueError(
                f"bidegree mismatch: ({self.p},{self.q}) vs ({other.p},{other.q})"
            )

    def __add__(self, other: "BigradedForm") -> "BigradedForm":
        self._like(other)
        acc = dict(self.terms)
        for b, c in other.terms.items():
            acc[b] = acc.get(b, ZERO) + c
        return BigradedForm(self.n, self.p, self.q, acc)

    def __neg__(self) -> "BigradedForm":
        return BigradedForm(self.n, self.p, self.q, {b: -c for b, c in self.terms.items()})

    def __sub__(self, other: "BigradedForm") -> "BigradedForm":
        return self + (-other)

    def scale(self, f) -> "BigradedForm":
        f = Expr.coerce(f)
        return BigradedForm(self.n, self.p, self.q, {b: c * f for b, c in self.terms.items()})

    def __mul__(self, f) -> "BigradedForm":
        if isinstance(f, BigradedForm):
            return wedge(self, f)
        return self.scale(f)

    __rmul__ = scale

    def __eq__(self, other) -> bool:
        if not isinstance(other, BigradedForm):
            return NotImplemented
        return (self.n, self.p, self.q, self.terms) == (other.n, other.p, other.q, other.terms)

    def __hash__(self):
        return hash((self.n, self.p, self.q, frozenset(self.terms.items())))

    def __repr__(self):
        return f"BigradedForm(({self.p},{self.q}), {format_form(self)})"

    def map_coefficients(self, fn) -> "BigradedForm":
        return BigradedForm(self.n, self.p, self.q, {b: fn(c) for b, c in self.terms.items()})

    def coefficient(self, contact=(), horiz=()) -> Expr:
        return self.terms.get((tuple(contact), tuple(horiz)), ZERO)

    def as_function(self) -> Expr:
        if self.p or self.q:
            raise ValueError("not a (0,0)-form")
        return self.coefficient()

    def top_coefficient(self) -> Expr:
        """Coefficient of ``d^n x`` of a ``(0, n)``-form."""
        if self.p or self.q != self.n:
            raise ValueError("not a (0,n)-form")
        return self.coefficient((), tuple(range(self.n)))

    def order(self) -> int:
        out = -1
        for (contact, _), c in self.terms.items():
            out = max([out, c.order()] + [k[2] for k in contact])
        return out


def as_form(n: int, F) -> BigradedForm:
    if isinstance(F, BigradedForm):
        return F
    return BigradedForm.function(n, F)


def wedge(F: BigradedForm, G: BigradedForm) -> BigradedForm:
    if F.n != G.n:
        raise ValueError("forms on different base dimensions")
    pieces = []
    base_sign = -1 if (F.q * G.p) % 2 else 1
    for (c1, h1), f in F.terms.items():
        for (c2, h2), g in G.terms.items():
            coeff = f * g
            pieces.append((coeff if base_sign == 1 else -coeff, c1 + c2, h1 + h2))
    return BigradedForm.build(F.n, F.p + G.p, F.q + G.q, pieces)


# ----------------------------------------------------------------------------
# differentials


def _dhat(coeff: Expr, contact: tuple, i: int):
    """``Dhat_i`` on ``coeff * contact``: yields ``(coeff, contact)`` pieces."""
    dc = total_derivative(coeff, i)
    if dc.terms:
        yield dc, contact
    for j, k in enumerate(contact):
        yield coeff, contact[:j] + (_shift(k, i),) + contact[j + 1:]


def dbar(F) -> BigradedForm:
    """Horizontal differential; bidegree ``(p, q) -> (p, q+1)``."""
    if not isinstance(F, BigradedForm):
        raise TypeError("dbar needs a BigradedForm; wrap functions with as_form")
    n, p, q = F.n, F.p, F.q
    if q >= n:
        return BigradedForm.zero(n, p, n + 1)
    sign = -1 if p % 2 else 1
    pieces = []
    for (contact, horiz), c in F.terms.items():
        for i in range(n):
            if i in horiz:
                continue
            for coeff, cont in _dhat(c, contact, i):
                pieces.append((coeff if sign == 1 else -coeff, cont, (i,) + horiz))
    return BigradedForm.build(n, p, q + 1, pieces)


def dvert(F) -> BigradedForm:
    """Vertical differential; bidegree ``(p, q) -> (p+1, q)``."""
    n, p, q = F.n, F.p, F.q
    pieces = []
    for (contact, horiz), c in F.terms.items():
        for k in sorted(c.jet_keys()):
            dk = c.partial(k)
            if dk.terms:
                pieces.append((dk, (k,) + contact, horiz))
    return BigradedForm.build(n, p + 1, q, pieces)


def contract(chi: EvolField, F: BigradedForm) -> BigradedForm:
    """Insertion ``i_{E_chi}``; bidegree ``(p, q) -> (p-1, q)`` (zero if ``p = 0``)."""
    n, p, q = F.n, F.p, F.q
    if p == 0:
        return BigradedForm.zero(n, 0, q)
    pieces = []
    for (contact, horiz), c in F.terms.items():
        for j, k in enumerate(contact):
            val = chi.prolonged(k[1], k[3])
            if not val.terms:
                continue
            coeff = c * val
            pieces.append((coeff if j % 2 == 0 else -coeff, contact[:j] + contact[j + 1:], horiz))
    return BigradedForm.build(n, p - 1, q, pieces)


def lie(chi: EvolField, F) -> BigradedForm:
    """Lie derivative along ``E_chi``, computed as a degree-0 derivation."""
    if not isinstance(F, BigradedForm):
        raise TypeError("lie needs a BigradedForm; wrap functions with as_form")
    n, p, q = F.n, F.p, F.q
    pieces = []
    for (contact, horiz), c in F.terms.items():
        dc = chi.act(c)
        if dc.terms:
            pieces.append((dc, contact, horiz))
        for j, k in enumerate(contact):
            # lie(w^a_K) = dvert(D_K chi^a)
            val = chi.prolonged(k[1], k[3])
            for k2 in sorted(val.jet_keys()):
                dk = val.partial(k2)
                if dk.terms:
                    pieces.append((c * dk, contact[:j] + (k2,) + contact[j + 1:], horiz))
    return BigradedForm.build(n, p, q, pieces)


def pairing(phi: Sequence[Expr], chi: Sequence[Expr]) -> Expr:
    out = ZERO
    for a, b in zip(phi, chi):
        out = out + Expr.coerce(a) * Expr.coerce(b)
    return out


# ----------------------------------------------------------------------------
# printing


def format_form(F: BigradedForm, bundle=None) -> str:
    """Text rendering, e.g. ``(u[t]) * w(u) ^ dx(t)``; terms joined by ``+``."""
    from .symexpr import format_expr

    fmt = bundle.format if bundle is not None else format_expr
    if not F.terms:
        return "0"
    parts = []
    for (contact, horiz) in sorted(F.terms):
        c = F.terms[(contact, horiz)]
        factors = []
        for k in contact:
            if bundle is None:
                factors.append(f"w({k[1] + 1};{','.join(map(str, mi_letters(k[3])))})")
            else:
                name = bundle.atom_name(k)
                factors.append(f"w({name})")
        for i in horiz:
            factors.append(f"dx({bundle.independent[i] if bundle else i + 1})")
        tail = " ^ ".join(factors)
        parts.append(f"({fmt(c)})" + (f" * {tail}" if tail else ""))
    return " + ".join(parts)
