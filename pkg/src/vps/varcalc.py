"""Euler-Lagrange operator, Legendre forms and the presymplectic current."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .jetcalc import (
    BigradedForm,
    EvolField,
    dbar,
    dvert,
    total_derivative,
    total_derivative_multi,
)
from .linop import adjoint, linearize
from .symexpr import BASE, FUNC, JET, ZERO, Bundle, Expr, jet_key


class NotExact(ValueError):
    """A (0, n)-form handed to :func:`split_divergence` is not a total divergence."""

    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class UnsupportedExpression(ValueError):
    """The expression lies outside the class a procedure can integrate."""


@dataclass(frozen=True)
class Lagrangian:
    bundle: Bundle
    density: Expr

    def __post_init__(self):
        self.bundle.check(self.density)

    @property
    def n(self) -> int:
        return self.bundle.n

    @property
    def m(self) -> int:
        return self.bundle.m

    def form(self) -> BigradedForm:
        return BigradedForm.top(self.n, self.density)

    def on(self, bundle: Bundle) -> "Lagrangian":
        """The same density viewed on an extension of its bundle."""
        return Lagrangian(bundle, self.density)


def variational_derivative(L: Expr, alpha: int) -> Expr:
    """``delta L / delta u^alpha = sum (-1)^|I| D_I (d L / d u^alpha_I)``."""
    acc = ZERO
    for k in sorted(L.jet_keys()):
        if k[1] != alpha:
            continue
        term = total_derivative_multi(L.partial(k), k[3])
        acc = acc - term if k[2] % 2 else acc + term
    return acc


def euler_lagrange_density(L: Expr, m: int) -> tuple:
    return tuple(variational_derivative(L, a) for a in range(m))


def euler_lagrange(L: Lagrangian) -> tuple:
    return euler_lagrange_density(L.density, L.m)


def source_form(n: int, phi: Sequence) -> BigradedForm:
    return BigradedForm.source(n, phi)


# ----------------------------------------------------------------------------
# integration by parts


def _integrate_by_parts(L: Expr, n: int, m: int):
    """Strip ``dvert(L d^n x)`` down to order zero.

    Returns ``(E, theta)`` with ``dvert(L d^n x) = E + dbar(theta)``, ``E`` the
    source form of the leftover order-zero coefficients.  A term
    ``f w^a_{I+i} d^n x`` is rewritten as
    ``-(D_i f) w^a_I d^n x - dbar(f w^a_I ^ iota(i))``, always removing the
    largest coordinate index present in the multi-index first.
    """
    pending: dict = {}
    for k in L.jet_keys():
        pending[k] = pending.get(k, ZERO) + L.partial(k)
    pieces = []
    top_order = max((k[2] for k in pending), default=0)
    for order in range(top_order, 0, -1):
        for k in sorted(kk for kk in pending if kk[2] == order):
            f = pending.pop(k)
            if not f.terms:
                continue
            counts = list(k[3])
            i = max(j for j, c in enumerate(counts) if c)
            counts[i] -= 1
            lower = jet_key(k[1], tuple(counts))
            pending[lower] = pending.get(lower, ZERO) - total_derivative(f, i)
            rest = tuple(j for j in range(n) if j != i)
            sign = -1 if i % 2 else 1
            # theta += -f w_lower ^ iota(i)
            pieces.append((f * (-sign), (lower,), rest))
    theta = BigradedForm.build(n, 1, n - 1, pieces)
    E = [ZERO] * m
    for k, f in pending.items():
        E[k[1]] = E[k[1]] + f
    return tuple(E), theta


@dataclass(frozen=True)
class LegendreForm:
    lagrangian: Lagrangian
    form: BigradedForm

    def __post_init__(self):
        L = self.lagrangian
        lhs = dvert(L.form()) - source_form(L.n, euler_lagrange(L))
        if lhs != dbar(self.form):
            raise ValueError("not a Legendre form: dvert L - E(L) != dbar theta")


@dataclass(frozen=True)
class PresymplecticCurrent:
    lagrangian: Lagrangian
    form: BigradedForm


def legendre_form(L: Lagrangian) -> LegendreForm:
    E, theta = _integrate_by_parts(L.density, L.n, L.m)
    return LegendreForm(L, theta)


def presymplectic_current(L: Lagrangian, theta: BigradedForm | None = None) -> PresymplecticCurrent:
    """``omega = -dvert(theta)`` (off-shell representative)."""
    if theta is None:
        theta = legendre_form(L).form
    return PresymplecticCurrent(L, -dvert(theta))


# ----------------------------------------------------------------------------
# total divergences


def _has_jet_inside_function(mono: tuple) -> bool:
    for k, _ in mono:
        if k[0] == FUNC and Expr._from_items(k[2]).jet_keys():
            return True
    return False


def _base_antiderivative(P0: Expr, n: int) -> BigradedForm:
    """A (0, n-1)-form ``s`` with ``dbar s = P0 d^n x`` for jet-free ``P0``."""
    pieces = []
    for mono, c in P0.terms.items():
        blocked = set()
        for k, _ in mono:
            if k[0] == FUNC:
                blocked |= {a[1] for a in Expr._from_items(k[2]).atoms() if a[0] == BASE}
        free = [i for i in range(n) if i not in blocked]
        if not free:
            raise UnsupportedExpression(
                "cannot integrate a term whose every coordinate sits inside sin/cos/exp"
            )
        i = free[0]
        power = dict(mono).get((BASE, i), 0)
        new = tuple(sorted([(k, e) for k, e in mono if k != (BASE, i)] + [((BASE, i), power + 1)]))
        coeff = Expr({new: c / (power + 1)})
        rest = tuple(j for j in range(n) if j != i)
        sign = -1 if i % 2 else 1
        pieces.append((coeff * sign, (), rest))
    return BigradedForm.build(n, 0, n - 1, pieces)


def split_divergence(T: BigradedForm) -> BigradedForm:
    """Return ``sigma`` with ``dbar(sigma) = T`` for a (0, n)-form with zero
    Euler-Lagrange derivatives.

    The jet-dependent part is integrated with the vertical homotopy: with
    ``theta`` from :func:`_integrate_by_parts` one has
    ``E_u(P) d^n x = -dbar(i_u theta)`` for the scaling field ``u``, and a
    jet-homogeneous piece of degree ``d`` satisfies ``E_u P_d = d P_d``.
    The jet-free part is integrated along the first admissible coordinate.
    """
    n = T.n
    if T.p != 0 or T.q != n:
        raise ValueError("split_divergence expects a (0, n)-form")
    P = T.top_coefficient()
    m = 1 + max((k[1] for k in P.jet_keys()), default=-1)
    E = euler_lagrange_density(P, m)
    if any(e.terms for e in E):
        raise NotExact("Euler-Lagrange derivatives do not vanish", E)

    jet_part, free_part = {}, {}
    for mono, c in P.terms.items():
        if any(k[0] == JET for k, _ in mono) or _has_jet_inside_function(mono):
            if _has_jet_inside_function(mono):
                raise UnsupportedExpression(
                    "split_divergence needs polynomial dependence on jet variables"
                )
            jet_part[mono] = c
        else:
            free_part[mono] = c

    sigma = _base_antiderivative(Expr(free_part), n)
    if jet_part:
        _, theta = _integrate_by_parts(Expr(jet_part), n, m)
        scaling = EvolField([Expr.jet(a, tuple([0] * n)) for a in range(m)])
        from .jetcalc import contract

        h = contract(scaling, theta)
        pieces = []
        for (contact, horiz), coeff in h.terms.items():
            by_degree: dict = {}
            for mono, c in coeff.terms.items():
                d = sum(e for k, e in mono if k[0] == JET)
                by_degree.setdefault(d, {})[mono] = c
            for d, terms in by_degree.items():
                pieces.append((Expr(terms) * Fraction(-1, d), contact, horiz))
        sigma = sigma + BigradedForm.build(n, 0, n - 1, pieces)
    if dbar(sigma) != T:
        raise RuntimeError("internal error: homotopy witness does not reproduce the divergence")
    return sigma


# ----------------------------------------------------------------------------
# Helmholtz


def helmholtz_selfadjoint(F: Sequence, n: int, m: int | None = None):
    """``(True, None)`` if ``linearize(F)`` is formally self-adjoint, else
    ``(False, linearize(F) - adjoint(linearize(F)))``."""
    F = tuple(Expr.coerce(f) for f in F)
    if m is None:
        m = len(F)
    ell = linearize(F, n, m)
    if ell.rows != ell.cols:
        return False, ell
    diff = ell - adjoint(ell)
    return diff.is_zero(), (None if diff.is_zero() else diff)
