import pytest
from hypothesis import given, settings

from vps import randgen
from vps.jetcalc import BigradedForm, as_form, dbar, dvert, wedge
from vps.onshell import (
    EquationSystem,
    Inconclusive,
    MissingSolvedForm,
    is_dbar_exact_on_shell,
    is_zero_on_shell,
    multi_indices,
    prolong,
    reduce,
)
from vps.symexpr import Bundle, Expr

from conftest import rngs

O = Bundle(["t"], ["u"])
u, ut, utt, uttt = (O.field("u", *("t",) * k) for k in range(4))
OSC = EquationSystem([utt + u], 1, {utt: -u})
BARE = EquationSystem([utt + u], 1)


def test_prolong_examples(maxwell):
    assert prolong(BARE, 1) == [utt + u, uttt + ut]
    assert prolong(BARE, 0) == [utt + u]
    assert len(prolong(maxwell.equations(), 1)) == 6


def test_reduce_examples():
    assert reduce(utt + u, OSC).is_zero()
    assert reduce(uttt, OSC) == -ut
    B = Bundle(["t", "x"], ["u"])
    eqs = EquationSystem([B.field("u", "t", "t") + B.field("u")], 2, {B.field("u", "t", "t"): -B.field("u")})
    assert reduce(B.field("u", "x"), eqs) == B.field("u", "x")
    with pytest.raises(MissingSolvedForm):
        reduce(u, BARE)


def test_solved_form_must_match_generator():
    with pytest.raises(ValueError):
        EquationSystem([utt + u], 1, {utt: u})


def test_is_zero_examples():
    for eqs in (OSC, BARE):
        ok, cert = is_zero_on_shell(ut * (utt + u), eqs, 0)
        assert ok and cert.multipliers == {(0, (0,)): ut}
    with pytest.raises(Inconclusive):
        is_zero_on_shell(u, BARE, 2)
    with pytest.raises(Inconclusive):
        is_zero_on_shell(u, OSC, 2)
    assert is_zero_on_shell(0, BARE)[0]


def test_refutes_needs_complete_system(maxwell):
    assert OSC.complete and OSC.refutes(u) == u and OSC.refutes(uttt + ut) is None
    assert not BARE.complete and BARE.refutes(u) is None
    assert not maxwell.equations().complete


def test_dbar_exact_examples():
    lam = as_form(1, u * ut)
    ok, cert = is_dbar_exact_on_shell(dbar(lam), BARE)
    assert ok and dbar(cert.primitive) == dbar(lam)
    w0 = dvert(as_form(1, u))
    F = wedge(w0, BigradedForm.dx(1, 0)).scale(utt + u)
    assert is_dbar_exact_on_shell(F, BARE)[0]
    assert is_dbar_exact_on_shell(F, OSC)[0]


def test_dbar_exact_inconclusive():
    with pytest.raises(Inconclusive):
        is_dbar_exact_on_shell(dvert(as_form(1, u)), BARE)


def _member(rng):
    e = Expr.const(0)
    for J in multi_indices(1, 2):
        e = e + randgen.expr(rng, 1, 1, 2, terms=2, degree=2) * OSC.prolonged(0, J)
    return e


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_paths_agree_on_members(rng):
    e = _member(rng)
    ok1, c1 = is_zero_on_shell(e, OSC, method="reduce")
    ok2, c2 = is_zero_on_shell(e, BARE)
    assert ok1 and ok2
    assert c1.reproduces(e, OSC) and c2.reproduces(e, BARE)


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_reduce_homomorphism(rng):
    a, b = randgen.expr(rng, 1, 1, 3), randgen.expr(rng, 1, 1, 3)
    assert reduce(a * b, OSC) == reduce(reduce(a, OSC) * reduce(b, OSC), OSC)
    assert reduce(reduce(a, OSC), OSC) == reduce(a, OSC)


@settings(max_examples=15, deadline=None)
@given(rngs)
def test_consistency_with_reduce(rng):
    e = randgen.expr(rng, 1, 1, 2, terms=3, degree=2)
    if reduce(e, OSC).is_zero():
        assert is_zero_on_shell(e, BARE)[0]
    else:
        with pytest.raises(Inconclusive):
            is_zero_on_shell(e, BARE)
