"""Seeded random objects for the property suites.

Everything takes an explicit :class:`random.Random`, so a suite run is fully
determined by its seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .jetcalc import BigradedForm, EvolField
from .linop import LinDiffOp
from .onshell import multi_indices
from .symexpr import ZERO, Bundle, Expr, jet_key

COEFFS = (Fraction(1), Fraction(-1), Fraction(2), Fraction(-3), Fraction(1, 2), Fraction(-2, 3))


def bundle(n: int, m: int, constants=()) -> Bundle:
    xs = ("t", "x", "y", "z")[:n]
    us = ("u", "v", "w1", "w2")[:m]
    return Bundle(xs, us, constants)


def jet_keys(n: int, m: int, max_order: int) -> list:
    return [jet_key(a, I) for a in range(m) for I in multi_indices(n, max_order)]


def expr(rng: random.Random, n: int, m: int, max_order: int = 2, terms: int = 3, degree: int = 3,
         base: bool = True, const: bool = True) -> Expr:
    """Polynomial in jet variables (and optionally the base coordinates)."""
    keys = jet_keys(n, m, max_order)
    out = ZERO
    for _ in range(rng.randint(1, terms)):
        mono = Expr.const(rng.choice(COEFFS))
        for _ in range(rng.randint(0 if const else 1, degree)):
            if base and rng.random() < 0.2:
                mono = mono * Expr.base(rng.randrange(n))
            else:
                mono = mono * Expr.atom(rng.choice(keys))
        out = out + mono
    return out


def form(rng: random.Random, n: int, m: int, p: int, q: int, max_order: int = 2, terms: int = 2) -> BigradedForm:
    keys = jet_keys(n, m, max_order)
    pieces = []
    for _ in range(rng.randint(1, terms)):
        contact = tuple(rng.sample(keys, p)) if p <= len(keys) else ()
        horiz = tuple(sorted(rng.sample(range(n), q)))
        c = expr(rng, n, m, max_order, terms=2, degree=2)
        pieces.append((c, contact, horiz))
    return BigradedForm.build(n, p, q, pieces)


def field(rng: random.Random, n: int, m: int, max_order: int = 1) -> EvolField:
    return EvolField([expr(rng, n, m, max_order, terms=2, degree=2) for _ in range(m)])


def lagrangian_density(rng: random.Random, n: int, m: int, max_order: int = 2) -> Expr:
    return expr(rng, n, m, max_order, terms=4, degree=3)


def operator(rng: random.Random, n: int, rows: int, cols: int, m: int = 1, max_order: int = 2,
             coeff_order: int = 1) -> LinDiffOp:
    indices = list(multi_indices(n, max_order))
    entries = []
    for _ in range(rows):
        row = []
        for _ in range(cols):
            e = {}
            for _ in range(rng.randint(0, 2)):
                I = rng.choice(indices)
                c = expr(rng, n, m, coeff_order, terms=2, degree=1) if rng.random() < 0.6 else Expr.const(rng.choice(COEFFS))
                e[I] = e.get(I, ZERO) + c
            row.append(e)
        entries.append(row)
    return LinDiffOp(n, entries)
