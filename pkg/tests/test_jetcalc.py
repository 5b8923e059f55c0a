from hypothesis import given, settings

from vps import randgen
from vps.jetcalc import (
    BigradedForm,
    EvolField,
    as_form,
    contract,
    dbar,
    dvert,
    lie,
    total_derivative,
    total_derivative_multi,
    wedge,
)
from vps.symexpr import Bundle, Expr

from conftest import rngs

B = Bundle(["t", "x"], ["u"])
u, ut, ux = B.field("u"), B.field("u", "t"), B.field("u", "x")
utt, utx = B.field("u", "t", "t"), B.field("u", "t", "x")
x = B.coord("x")
T = 0  # index of t

O = Bundle(["t"], ["u"])
ou, out_, outt, outtt = O.field("u"), O.field("u", "t"), O.field("u", "t", "t"), O.field("u", "t", "t", "t")


def w(bundle, name, *d):
    k = bundle.field(name, *d).sorted_items()[0][0][0][0]
    return BigradedForm(bundle.n, 1, 0, {((k,), ()): Expr.const(1)})


def test_total_derivative_examples():
    assert total_derivative(u * ut, T) == ut**2 + u * utt
    assert total_derivative(x * u, 1) == u + x * ux
    assert total_derivative(u.sin(), T) == u.cos() * ut


def test_total_derivative_multi_examples():
    assert total_derivative_multi(u, (1, 1)) == utx
    assert total_derivative_multi(u * ux, (0, 0)) == u * ux
    assert total_derivative_multi(u**2, (2, 0)) == 2 * ut**2 + 2 * u * utt


def test_dbar_on_function():
    F = dbar(as_form(2, u))
    assert F == BigradedForm.build(2, 0, 1, [(ut, (), (0,)), (ux, (), (1,))])


def test_dvert_oscillator_lagrangian():
    L = out_**2 / 2 - ou**2 / 2
    expected = w(O, "u", "t").scale(out_) + w(O, "u").scale(-ou)
    assert dvert(as_form(1, L)) == expected
    assert dvert(as_form(1, O.coord("t"))).is_zero()


def test_wedge_examples():
    wu = w(B, "u")
    assert wedge(wu, wu).is_zero()
    dt, dx = BigradedForm.dx(2, 0), BigradedForm.dx(2, 1)
    assert wedge(dt, dx) == -wedge(dx, dt)
    assert wedge(as_form(2, u), dt) == dt.scale(u)


def test_contract_examples():
    chi = EvolField([out_])
    assert contract(chi, w(O, "u", "t", "t")).as_function() == outtt
    assert contract(chi, BigradedForm.top(1, ou)).is_zero()
    L = out_**2 / 2 - ou**2 / 2
    assert contract(chi, dvert(as_form(1, L))).as_function() == total_derivative(L, 0)


def test_lie_examples():
    chi = EvolField([out_])
    assert lie(chi, as_form(1, ou)).as_function() == out_
    L = out_**2 / 2 - ou**2 / 2
    assert lie(chi, as_form(1, L)).as_function() == total_derivative(L, 0)


def test_dbar_contact_sign():
    # dbar w_I = -w_{It} ^ dt in one dimension
    assert dbar(w(O, "u")) == wedge(w(O, "u", "t"), BigradedForm.dx(1, 0)).scale(Expr.const(-1))


def _sum_zero(*forms):
    acc = {}
    for F in forms:
        for b, c in F.terms.items():
            acc[b] = acc[b] + c if b in acc else c
    return all(c.is_zero() for c in acc.values())


@settings(max_examples=30, deadline=None)
@given(rngs)
def test_bicomplex_laws(rng):
    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    F = randgen.form(rng, n, m, rng.randint(0, 2), rng.randint(0, n), max_order=3)
    chi = randgen.field(rng, n, m)
    assert dbar(dbar(F)).is_zero()
    assert dvert(dvert(F)).is_zero()
    assert _sum_zero(dbar(dvert(F)), dvert(dbar(F)))
    assert _sum_zero(contract(chi, dbar(F)), dbar(contract(chi, F)))
    assert _sum_zero(lie(chi, F), -contract(chi, dvert(F)), -dvert(contract(chi, F)))
    assert _sum_zero(lie(chi, dbar(F)), -dbar(lie(chi, F)))


@settings(max_examples=30, deadline=None)
@given(rngs)
def test_total_derivatives_commute(rng):
    f = randgen.expr(rng, 2, 2, 2)
    assert total_derivative(total_derivative(f, 0), 1) == total_derivative(total_derivative(f, 1), 0)


@settings(max_examples=30, deadline=None)
@given(rngs)
def test_contract_graded_derivation(rng):
    n, m = 2, rng.choice((1, 2))
    F = randgen.form(rng, n, m, rng.randint(0, 2), rng.randint(0, 1))
    G = randgen.form(rng, n, m, rng.randint(0, 2), rng.randint(0, 1))
    chi = randgen.field(rng, n, m)
    sign = Expr.const(-1 if (F.p + F.q) % 2 else 1)
    assert _sum_zero(
        contract(chi, wedge(F, G)),
        -wedge(contract(chi, F), G),
        -wedge(F, contract(chi, G)).scale(sign),
    )
