import pytest
from hypothesis import given, settings

from vps import randgen
from vps.jetcalc import BigradedForm, dbar, dvert, total_derivative
from vps.linop import LinDiffOp
from vps.symexpr import Bundle, Expr
from vps.varcalc import (
    Lagrangian,
    LegendreForm,
    NotExact,
    UnsupportedExpression,
    euler_lagrange,
    euler_lagrange_density,
    helmholtz_selfadjoint,
    legendre_form,
    presymplectic_current,
    source_form,
    split_divergence,
)

from conftest import rngs

O = Bundle(["t"], ["u"])
u, ut, utt = O.field("u"), O.field("u", "t"), O.field("u", "t", "t")
L_osc = Lagrangian(O, ut**2 / 2 - u**2 / 2)


def test_euler_lagrange_examples(kg):
    assert euler_lagrange(L_osc) == (-utt - u,)
    B = kg.bundle
    m = B.const("m")
    assert euler_lagrange(kg.lagrangian()) == (-B.field("u", "t", "t") + B.field("u", "x", "x") - m**2 * B.field("u"),)


def test_legendre_oscillator():
    theta = legendre_form(L_osc).form
    # our convention gives theta = -u_t w(u); the identity is what matters
    assert theta == BigradedForm(1, 1, 0, {((u.sorted_items()[0][0][0][0],), ()): -ut})
    assert dvert(L_osc.form()) - source_form(1, euler_lagrange(L_osc)) == dbar(theta)


def test_legendre_order_zero():
    assert legendre_form(Lagrangian(O, u**3)).form.is_zero()
    assert presymplectic_current(Lagrangian(O, u**3)).form.is_zero()


def test_legendre_maxwell(maxwell):
    L = maxwell.lagrangian()
    B = maxwell.bundle
    F = B.field("A1", "t") - B.field("A0", "x")
    theta = legendre_form(L).form
    assert theta.coefficient((B.field("A0").sorted_items()[0][0][0][0],), (0,)) == -F
    assert theta.coefficient((B.field("A1").sorted_items()[0][0][0][0],), (1,)) == -F


def test_legendre_form_rejects_wrong_theta():
    with pytest.raises(ValueError):
        LegendreForm(L_osc, BigradedForm.zero(1, 1, 0))


def test_oscillator_omega():
    omega = presymplectic_current(L_osc).form
    assert len(omega.terms) == 1 and list(omega.terms.values())[0] == Expr.const(-1)


def test_split_divergence_examples():
    sigma = split_divergence(BigradedForm.top(1, ut * utt))
    assert sigma.as_function() == ut**2 / 2
    assert split_divergence(BigradedForm.top(1, 0)).is_zero()
    B = Bundle(["t", "x"], ["u"])
    ut2, ux2 = B.field("u", "t"), B.field("u", "x")
    T = BigradedForm.top(2, ut2 * B.field("u", "x", "x") + B.field("u", "t", "x") * ux2)
    assert dbar(split_divergence(T)) == T


def test_split_divergence_base_terms():
    B = Bundle(["t", "x"], ["u"])
    t, x = B.coord("t"), B.coord("x")
    T = BigradedForm.top(2, t * x + x.sin())
    assert dbar(split_divergence(T)) == T


def test_split_divergence_not_exact():
    with pytest.raises(NotExact) as info:
        split_divergence(BigradedForm.top(1, u * ut + u))
    assert info.value.witness == (Expr.const(1),)


def test_split_divergence_unsupported():
    with pytest.raises(UnsupportedExpression):
        split_divergence(BigradedForm.top(1, total_derivative(u.sin(), 0)))


def test_helmholtz_examples():
    ok, witness = helmholtz_selfadjoint([ut], 1)
    assert not ok and witness == LinDiffOp.scalar(1, {(1,): 2})
    assert helmholtz_selfadjoint([utt], 1) == (True, None)


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_null_lagrangians(rng):
    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    f = randgen.expr(rng, n, m, 2)
    for i in range(n):
        assert all(e.is_zero() for e in euler_lagrange_density(total_derivative(f, i), m))


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_helmholtz_random(rng):
    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    L = randgen.lagrangian_density(rng, n, m, 2)
    assert helmholtz_selfadjoint(euler_lagrange_density(L, m), n, m)[0]


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_identities_random(rng):
    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    bundle = randgen.bundle(n, m)
    L = Lagrangian(bundle, randgen.lagrangian_density(rng, n, m, 2))
    E = source_form(n, euler_lagrange(L))
    theta = legendre_form(L).form
    assert dvert(L.form()) - E == dbar(theta)
    omega = presymplectic_current(L, theta).form
    assert (dbar(omega) + dvert(E)).is_zero()


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_split_divergence_random(rng):
    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    sigma = randgen.form(rng, n, m, 0, n - 1, max_order=2)
    T = dbar(sigma)
    assert dbar(split_divergence(T)) == T
