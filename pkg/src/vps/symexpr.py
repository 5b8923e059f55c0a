"""Exact differential polynomials over jet coordinates.

An :class:`Expr` is a finite sum of monomials with rational coefficients.
Atoms are keyed by plain tuples so that one total order covers everything:

* ``(0, i)``                    base coordinate ``x^i``
* ``(1, k)``                    named constant
* ``(2, alpha, |I|, counts)``   jet variable ``u^alpha_I``
* ``(3, kind, arg_items)``      ``sin``/``cos``/``exp`` of a canonical argument

Expressions know nothing about names; a :class:`Bundle` supplies them for
parsing and printing.  Every operation returns a new, already canonical value.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

BASE, CONST, JET, FUNC = 0, 1, 2, 3
SIN, COS, EXP = 0, 1, 2
FUNC_NAMES = ("sin", "cos", "exp")


class UnknownVariableError(ValueError):
    """Raised when a name or key does not belong to the ambient bundle."""


# ----------------------------------------------------------------------------
# multi-indices: plain tuples of per-coordinate counts


def multi_index(n: int, *indices: int) -> tuple:
    counts = [0] * n
    for i in indices:
        counts[i] += 1
    return tuple(counts)


def mi_add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def mi_order(a: tuple) -> int:
    return sum(a)


def mi_sub(a: tuple, b: tuple) -> tuple | None:
    """``a - b`` if ``b <= a`` componentwise, else ``None``."""
    out = tuple(x - y for x, y in zip(a, b))
    return out if min(out, default=0) >= 0 else None


def mi_subindices(a: tuple):
    """Yield every ``b <= a`` together with the multinomial ``binom(a, b)``."""
    from itertools import product
    from math import comb

    for b in product(*(range(k + 1) for k in a)):
        c = 1
        for x, y in zip(a, b):
            c *= comb(x, y)
        yield b, c


def mi_letters(a: tuple) -> list[int]:
    """Expand a count vector into a sorted list of coordinate indices."""
    out = []
    for i, k in enumerate(a):
        out.extend([i] * k)
    return out


def jet_key(alpha: int, counts: tuple) -> tuple:
    return (JET, alpha, sum(counts), tuple(counts))


def base_key(i: int) -> tuple:
    return (BASE, i)


def const_key(k: int) -> tuple:
    return (CONST, k)


# ----------------------------------------------------------------------------
# monomial kernels


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _add_into(acc: dict, terms: Mapping, scale=1) -> None:
    for m, c in terms.items():
        v = acc.get(m, 0) + c * scale
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)


def _mul_terms(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            v = out.get(m, 0) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"exact rational expected, got {type(c).__name__}")


class Expr:
    """Canonical sum of monomials; immutable and hashable."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        # callers hand over ownership of `terms`; zero coefficients must be absent
        self.terms = dict(terms) if terms else {}
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Expr":
        c = _frac(c)
        return cls({(): c} if c else None)

    @classmethod
    def atom(cls, key: tuple, power: int = 1) -> "Expr":
        if power == 0:
            return ONE
        return cls({((key, power),): Fraction(1)})

    @classmethod
    def jet(cls, alpha: int, counts: tuple) -> "Expr":
        return cls.atom(jet_key(alpha, counts))

    @classmethod
    def base(cls, i: int) -> "Expr":
        return cls.atom(base_key(i))

    @classmethod
    def constant(cls, k: int) -> "Expr":
        return cls.atom(const_key(k))

    @classmethod
    def _from_items(cls, items) -> "Expr":
        return cls(dict(items))

    # elementary functions --------------------------------------------------
    def _func(self, kind: int) -> "Expr":
        if not self.terms:
            return ZERO if kind == SIN else ONE
        return Expr.atom((FUNC, kind, self.sorted_items()))

    def sin(self) -> "Expr":
        return self._func(SIN)

    def cos(self) -> "Expr":
        return self._func(COS)

    def exp(self) -> "Expr":
        return self._func(EXP)

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def coerce(other) -> "Expr":
        if isinstance(other, Expr):
            return other
        return Expr.const(other)

    def __add__(self, other) -> "Expr":
        other = Expr.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        acc = dict(self.terms)
        _add_into(acc, other.terms)
        return Expr(acc)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Expr":
        other = Expr.coerce(other)
        acc = dict(self.terms)
        _add_into(acc, other.terms, -1)
        return Expr(acc)

    def __rsub__(self, other) -> "Expr":
        return Expr.coerce(other) - self

    def __mul__(self, other) -> "Expr":
        if not isinstance(other, Expr):
            c = _frac(other)
            if not c:
                return ZERO
            return Expr({m: v * c for m, v in self.terms.items()})
        return Expr(_mul_terms(self.terms, other.terms))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        if isinstance(other, Expr):
            c = other.as_constant()
            if c is None:
                raise TypeError("division only by nonzero rational constants")
        else:
            c = _frac(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self * (1 / c)

    def __pow__(self, k: int) -> "Expr":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # comparison -------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            try:
                other = Expr.coerce(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"Expr({format_expr(self)})"

    # inspection -----------------------------------------------------------
    def sorted_items(self) -> tuple:
        return tuple(sorted(self.terms.items()))

    def as_constant(self) -> Fraction | None:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        return None

    def atoms(self, deep: bool = True) -> set:
        """All atom keys; with ``deep`` the atoms inside function arguments too."""
        out = set()
        for m in self.terms:
            for k, _ in m:
                out.add(k)
                if deep and k[0] == FUNC:
                    out |= Expr._from_items(k[2]).atoms()
        return out

    def jet_keys(self) -> set:
        return {k for k in self.atoms() if k[0] == JET}

    def order(self) -> int:
        """Jet order; -1 when no jet variable occurs."""
        return max((k[2] for k in self.jet_keys()), default=-1)

    def monomials(self) -> Iterable:
        return self.terms.items()

    def jet_degree(self) -> int:
        """Largest total degree in (top-level) jet variables over all monomials."""
        return max((sum(e for k, e in m if k[0] == JET) for m in self.terms), default=0)

    # calculus ---------------------------------------------------------------
    def derive(self, atom_derivative: Callable[[tuple], "Expr | None"]) -> "Expr":
        """Apply the derivation determined by its values on atoms.

        Function atoms are differentiated by the chain rule through their
        arguments, so ``atom_derivative`` is only consulted for polynomial atoms.
        """
        acc: dict = {}
        cache: dict = {}
        for m, c in self.terms.items():
            for j, (k, e) in enumerate(m):
                if k in cache:
                    dk = cache[k]
                else:
                    dk = cache[k] = _atom_derivative(k, atom_derivative)
                if dk is None or not dk.terms:
                    continue
                rest = m[:j] + ((k, e - 1),) + m[j + 1:] if e > 1 else m[:j] + m[j + 1:]
                scale = c * e
                for dm, dc in dk.terms.items():
                    mm = _mono_mul(rest, dm)
                    v = acc.get(mm, 0) + scale * dc
                    if v:
                        acc[mm] = v
                    else:
                        acc.pop(mm, None)
        return Expr(acc)

    def partial(self, key: tuple) -> "Expr":
        return self.derive(lambda k: ONE if k == key else None)

    def substitute(self, bindings: Mapping[tuple, "Expr"]) -> "Expr":
        """Simultaneous substitution of atoms (including inside function arguments)."""
        if not bindings:
            return self
        acc: dict = {}
        cache: dict = {}
        for m, c in self.terms.items():
            term = Expr({(): c})
            plain = []
            for k, e in m:
                r = cache.get(k)
                if r is None:
                    r = cache[k] = _substitute_atom(k, bindings)
                if r is False:
                    plain.append((k, e))
                else:
                    term = term * (r ** e)
            if plain:
                term = term * Expr({tuple(plain): Fraction(1)})
            _add_into(acc, term.terms)
        return Expr(acc)


def _substitute_atom(k: tuple, bindings: Mapping):
    if k in bindings:
        return Expr.coerce(bindings[k])
    if k[0] == FUNC:
        arg = Expr._from_items(k[2])
        new = arg.substitute(bindings)
        if new != arg:
            return new._func(k[1])
    return False


def _atom_derivative(k: tuple, atom_derivative):
    if k[0] != FUNC:
        return atom_derivative(k)
    arg = Expr._from_items(k[2])
    darg = arg.derive(atom_derivative)
    if not darg.terms:
        return None
    kind = k[1]
    if kind == SIN:
        outer = arg.cos()
    elif kind == COS:
        outer = -arg.sin()
    else:
        outer = Expr.atom(k)
    return outer * darg


ZERO = Expr()
ONE = Expr({(): Fraction(1)})


# ----------------------------------------------------------------------------
# module-level operations


def normalize(e: Expr) -> Expr:
    """Canonical form.  Values are canonical by construction, so this rebuilds
    the expression from its atoms, which doubles as a consistency check."""
    acc: dict = {}
    for m, c in e.terms.items():
        term = Expr.const(c)
        for k, p in m:
            if k[0] == FUNC:
                atom = normalize(Expr._from_items(k[2]))._func(k[1])
            else:
                atom = Expr.atom(k)
            term = term * atom**p
        _add_into(acc, term.terms)
    return Expr(acc)


def partial(e: Expr, v: Expr) -> Expr:
    """Formal partial derivative by the single variable ``v`` (an atom expression)."""
    return e.partial(variable_key(v))


def variable_key(v) -> tuple:
    if isinstance(v, tuple) and v and v[0] in (BASE, CONST, JET):
        return v
    if isinstance(v, Expr) and len(v.terms) == 1:
        ((m, c),) = v.terms.items()
        if c == 1 and len(m) == 1 and m[0][1] == 1 and m[0][0][0] != FUNC:
            return m[0][0]
    raise UnknownVariableError(f"not a coordinate, constant or jet variable: {v!r}")


def substitute(e: Expr, bindings: Mapping) -> Expr:
    return e.substitute({variable_key(k): Expr.coerce(v) for k, v in bindings.items()})


def equal(a, b) -> bool:
    return (Expr.coerce(a) - Expr.coerce(b)).is_zero()


# ----------------------------------------------------------------------------
# names


class Bundle:
    """Coordinate universe of a fibre bundle: base coordinates, fields, constants."""

    def __init__(self, independent, dependent, constants=()):
        self.independent = tuple(independent)
        self.dependent = tuple(dependent)
        self.constants = tuple(constants)
        names = self.independent + self.dependent + self.constants
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in bundle: {names}")
        if not self.independent or not self.dependent:
            raise ValueError("a bundle needs at least one independent and one dependent variable")

    @property
    def n(self) -> int:
        return len(self.independent)

    @property
    def m(self) -> int:
        return len(self.dependent)

    def __eq__(self, other):
        return isinstance(other, Bundle) and (
            self.independent, self.dependent, self.constants
        ) == (other.independent, other.dependent, other.constants)

    def __hash__(self):
        return hash((self.independent, self.dependent, self.constants))

    def __repr__(self):
        return f"Bundle({list(self.independent)}, {list(self.dependent)}, {list(self.constants)})"

    def extended(self, fields) -> "Bundle":
        """Same bundle with extra dependent fields appended (indices of old fields unchanged)."""
        return Bundle(self.independent, self.dependent + tuple(fields), self.constants)

    # lookup -----------------------------------------------------------------
    def index_of(self, name: str) -> int:
        try:
            return self.independent.index(name)
        except ValueError:
            raise UnknownVariableError(f"undeclared independent variable {name!r}") from None

    def field_index(self, name: str) -> int:
        try:
            return self.dependent.index(name)
        except ValueError:
            raise UnknownVariableError(f"undeclared field {name!r}") from None

    def counts(self, *names: str) -> tuple:
        return multi_index(self.n, *(self.index_of(s) for s in names))

    def coord(self, name: str) -> Expr:
        return Expr.base(self.index_of(name))

    def const(self, name: str) -> Expr:
        try:
            return Expr.constant(self.constants.index(name))
        except ValueError:
            raise UnknownVariableError(f"undeclared constant {name!r}") from None

    def field(self, name: str, *derivs: str) -> Expr:
        return Expr.jet(self.field_index(name), self.counts(*derivs))

    def symbol(self, name: str) -> Expr:
        if name in self.independent:
            return self.coord(name)
        if name in self.dependent:
            return self.field(name)
        if name in self.constants:
            return self.const(name)
        raise UnknownVariableError(f"undeclared identifier {name!r}")

    def check(self, e: Expr) -> Expr:
        """Raise if ``e`` mentions an atom outside this bundle."""
        for k in e.atoms():
            if k[0] == BASE and not k[1] < self.n:
                raise UnknownVariableError(f"base coordinate #{k[1]} not in bundle")
            if k[0] == CONST and not k[1] < len(self.constants):
                raise UnknownVariableError(f"constant #{k[1]} not in bundle")
            if k[0] == JET and (not k[1] < self.m or len(k[3]) != self.n):
                raise UnknownVariableError(f"jet variable {k} not in bundle")
        return e

    # printing ---------------------------------------------------------------
    def atom_name(self, k: tuple) -> str:
        kind = k[0]
        if kind == BASE:
            return self.independent[k[1]]
        if kind == CONST:
            return self.constants[k[1]]
        if kind == JET:
            name = self.dependent[k[1]]
            if k[2] == 0:
                return name
            return f"{name}[{','.join(self.independent[i] for i in mi_letters(k[3]))}]"
        return f"{FUNC_NAMES[k[1]]}({self.format(Expr._from_items(k[2]))})"

    def format(self, e: Expr) -> str:
        return format_expr(e, self.atom_name)


def _default_atom_name(k: tuple) -> str:
    if k[0] == BASE:
        return f"x{k[1] + 1}"
    if k[0] == CONST:
        return f"c{k[1] + 1}"
    if k[0] == JET:
        name = f"u{k[1] + 1}"
        if k[2] == 0:
            return name
        return f"{name}[{','.join(f'x{i + 1}' for i in mi_letters(k[3]))}]"
    return f"{FUNC_NAMES[k[1]]}({format_expr(Expr._from_items(k[2]))})"


def _mono_sort_key(m: tuple):
    return tuple(reversed(m))


def format_expr(e: Expr, atom_name=_default_atom_name) -> str:
    """Canonical text: monomials in descending order, ``a/b*x^2*y`` style factors."""
    if not e.terms:
        return "0"
    parts = []
    for m in sorted(e.terms, key=_mono_sort_key, reverse=True):
        c = e.terms[m]
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = []
        for k, p in m:
            name = atom_name(k)
            factors.append(name if p == 1 else f"{name}^{p}")
        if not factors:
            body = str(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(c)] + factors)
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
