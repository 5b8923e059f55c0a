import pytest
from hypothesis import given, settings

from vps import randgen
from vps.jetcalc import BigradedForm, dbar
from vps.linop import (
    LinDiffOp,
    adjoint,
    apply,
    compose,
    format_op,
    green_remainder,
    is_complex,
    linearize,
    pairing_density,
)
from vps.symexpr import Bundle, Expr, ONE

from conftest import rngs

O = Bundle(["t"], ["u", "v"])
u, ut, utt, v = O.field("u"), O.field("u", "t"), O.field("u", "t", "t"), O.field("v")
Dt = LinDiffOp.scalar(1, {(1,): 1})


def test_linearize_examples():
    assert linearize([utt + u], 1, 1) == LinDiffOp.scalar(1, {(2,): 1, (0,): 1})
    B = Bundle(["x"], ["u"])
    uu, ux = B.field("u"), B.field("u", "x")
    assert linearize([uu * ux], 1, 1) == LinDiffOp.scalar(1, {(1,): uu, (0,): ux})
    assert linearize([Expr.const(3)], 1, 1).is_zero()


def test_apply_examples():
    op = LinDiffOp.scalar(1, {(1,): 1, (0,): 1})
    assert apply(op, [u]) == (ut + u,)
    assert apply(LinDiffOp.zero(1, 1, 1), [u]) == (Expr.const(0),)
    ell = linearize([-utt - u], 1, 1)
    assert apply(ell, [ut]) == (-O.field("u", "t", "t", "t") - ut,)


def test_apply_arity():
    with pytest.raises(ValueError):
        apply(Dt, [u, v])


def test_adjoint_examples():
    assert adjoint(Dt) == LinDiffOp.scalar(1, {(1,): -1})
    assert adjoint(LinDiffOp.scalar(1, {(0,): u})) == LinDiffOp.scalar(1, {(0,): u})


def test_compose_examples():
    Dx = LinDiffOp.scalar(2, {(0, 1): 1})
    Dt2 = LinDiffOp.scalar(2, {(1, 0): 1})
    assert compose(Dt2, Dx) == compose(Dx, Dt2) == LinDiffOp.scalar(2, {(1, 1): 1})
    assert compose(LinDiffOp.identity(1, 1), Dt) == Dt
    with pytest.raises(ValueError):
        compose(LinDiffOp.zero(1, 1, 2), Dt)


def test_green_examples():
    G = green_remainder(Dt, [u], [v])
    assert G.as_function() == u * v
    assert green_remainder(LinDiffOp.scalar(1, {(0,): u}), [v], [ut]).is_zero()


def test_is_complex_examples(maxwell):
    from vps.varcalc import euler_lagrange

    L = maxwell.lagrangian()
    div = maxwell.operator("div").op
    assert is_complex(div, linearize(euler_lagrange(L), 2, 2))
    assert is_complex(div, LinDiffOp.zero(2, 2, 3))
    grad = maxwell.operator("grad").op
    curl = LinDiffOp(2, [[{(0, 1): ONE}, {(1, 0): -ONE}]])
    assert is_complex(curl, grad)
    assert not is_complex(div, grad)


def test_format_op():
    B = Bundle(["t", "x"], ["u"])
    op = LinDiffOp(2, [[{(1, 0): ONE, (0, 0): 2 * B.field("u")}, {}]])
    assert format_op(op, B) == "D[t] + (2*u), 0"


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_adjoint_algebra(rng):
    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    A = randgen.operator(rng, n, rng.randint(1, 2), rng.randint(1, 2), m)
    B = randgen.operator(rng, n, rng.randint(1, 2), A.rows, m)
    assert adjoint(adjoint(A)) == A
    assert adjoint(compose(B, A)) == compose(adjoint(A), adjoint(B))


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_green_formula(rng):
    n = rng.choice((1, 2))
    op = randgen.operator(rng, n, rng.randint(1, 2), rng.randint(1, 2), 2)
    p = [randgen.expr(rng, n, 2, 1, terms=2, degree=2) for _ in range(op.cols)]
    q = [randgen.expr(rng, n, 2, 1, terms=2, degree=2) for _ in range(op.rows)]
    G = green_remainder(op, p, q)
    diff = pairing_density(q, apply(op, p)) - pairing_density(apply(adjoint(op), q), p)
    assert dbar(G) == BigradedForm.top(n, diff)


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_linearize_matches_lie(rng):
    from vps.jetcalc import lie, as_form

    n, m = rng.choice((1, 2)), rng.choice((1, 2))
    phi = randgen.expr(rng, n, m, 2)
    chi = randgen.field(rng, n, m)
    assert apply(linearize([phi], n, m), list(chi.components))[0] == lie(chi, as_form(n, phi)).as_function()


@settings(max_examples=25, deadline=None)
@given(rngs)
def test_linearize_leibniz(rng):
    n, m = rng.choice((1, 2)), 1
    f, g = randgen.expr(rng, n, m, 2), randgen.expr(rng, n, m, 2)
    lhs = linearize([f * g], n, m)
    rhs = LinDiffOp(n, [[{I: g * c for I, c in linearize([f], n, m).entries[0][0].items()}]]) + LinDiffOp(
        n, [[{I: f * c for I, c in linearize([g], n, m).entries[0][0].items()}]]
    )
    assert lhs == rhs


@settings(max_examples=15, deadline=None)
@given(rngs)
def test_dubois_reymond(rng):
    """A nonzero r pairs to a non-divergence with some monomial section."""
    from vps.varcalc import euler_lagrange_density

    r = randgen.expr(rng, 1, 1, 1, terms=2, degree=2)
    if r.is_zero():
        return
    B = Bundle(["t"], ["u"])
    sections = [Expr.const(1), B.coord("t"), B.coord("t") ** 2, B.field("u")]
    assert any(any(not e.is_zero() for e in euler_lagrange_density(q * r, 1)) for q in sections)
