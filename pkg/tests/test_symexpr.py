from fractions import Fraction

import pytest
from hypothesis import given, settings

from vps import randgen
from vps.symexpr import Bundle, Expr, UnknownVariableError, equal, normalize, partial, substitute

from conftest import rngs

B = Bundle(["t", "x"], ["u"], ["m"])
u, ut, ux = B.field("u"), B.field("u", "t"), B.field("u", "x")
utt, utx = B.field("u", "t", "t"), B.field("u", "t", "x")
x = B.coord("x")


def test_normalize_examples():
    assert normalize(u * ut - ut * u).is_zero()
    assert normalize((u + u) * x) == Expr.const(2) * x * u
    e = u.sin() ** 2 + u.cos() ** 2
    assert normalize(e) == e and not equal(e, 1)


def test_partial_examples():
    assert partial(ut**2, ut) == 2 * ut
    assert partial(x * utx, utx) == x
    assert partial(ut**2, u).is_zero()


def test_partial_through_functions():
    assert partial(u.sin(), u) == u.cos()
    assert partial((2 * u).exp(), u) == 2 * (2 * u).exp()


def test_unknown_variable():
    with pytest.raises(UnknownVariableError):
        B.symbol("q")
    with pytest.raises(UnknownVariableError):
        partial(u, u + ut)


def test_substitute_examples():
    assert substitute(utt + u, {utt: -u}).is_zero()
    assert substitute(ut * utt, {utt: -u}) == -u * ut
    assert substitute(u, {}) == u


def test_equal_examples():
    assert equal(ut**2 + u * utt, u * utt + ut**2)
    assert not equal(u, ut)
    assert equal(0, u - u)


def test_format():
    assert B.format(-utt - u) == "-u[t,t] - u"
    assert B.format(ut**2 / 2 - B.const("m") ** 2 * u**2 / 2) == "1/2*u[t]^2 - 1/2*m^2*u^2"
    assert B.format(Expr.const(0)) == "0"


def test_rational_only_division():
    assert u / 3 == u * Fraction(1, 3)
    with pytest.raises((TypeError, ZeroDivisionError, ValueError)):
        u / u


def test_sin_of_zero_simplifies():
    zero = Expr.const(0)
    assert zero.sin().is_zero() and zero.cos() == Expr.const(1) and zero.exp() == Expr.const(1)


@settings(max_examples=40, deadline=None)
@given(rngs)
def test_normalize_idempotent(rng):
    e = randgen.expr(rng, 2, 2, 2)
    assert normalize(normalize(e)) == normalize(e) == e


@settings(max_examples=40, deadline=None)
@given(rngs)
def test_ring_laws(rng):
    a, b, c = (randgen.expr(rng, 2, 1, 2) for _ in range(3))
    assert equal((a + b) + c, a + (b + c))
    assert equal(a * b, b * a)
    assert equal((a * b) * c, a * (b * c))
    assert equal(a * (b + c), a * b + a * c)
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(rngs)
def test_partials_commute(rng):
    e = randgen.expr(rng, 2, 1, 2, terms=4)
    keys = sorted(e.atoms()) or [(0, 0)]
    v, w = rng.choice(keys), rng.choice(keys)
    assert e.partial(v).partial(w) == e.partial(w).partial(v)
