import pytest

from vps.dsl import DSLError, parse_expr, parse_form, parse_model, parse_operator, print_model, tokenize
from vps.jetcalc import format_form
from vps.linop import format_op
from vps.selftest import BAD_INPUTS, MODELS
from vps.symexpr import Bundle

OSC = """
version 1;
model "osc" {
  independent t;
  dependent u;
  lagrangian L = 1/2*u_t^2 - 1/2*u^2;
}
"""


def test_minimal_model():
    M = parse_model(OSC)
    assert (M.bundle.n, M.bundle.m) == (1, 1)
    assert list(M.lagrangians) == ["L"]
    assert M.version == 1


def test_suffix_ambiguity():
    with pytest.raises(DSLError) as info:
        parse_model('model "a" { independent x1 x2; dependent u; lagrangian L = u_x1; }')
    assert "u[...]" in str(info.value)
    assert (info.value.line, info.value.col) == (1, 60)


def test_undeclared_identifier():
    with pytest.raises(DSLError) as info:
        parse_model('model "a" { independent t; dependent u; lagrangian L = u_q; }')
    assert "undeclared" in info.value.message


def test_expected_set():
    with pytest.raises(DSLError) as info:
        parse_model('model "a" {\n  independent t;\n  dependent u;\n  lagrangian L = u_t +;\n}')
    assert info.value.line == 4 and "number" in info.value.expected


def test_lexical_error():
    with pytest.raises(DSLError):
        tokenize("u $ v")


@pytest.mark.parametrize("text", BAD_INPUTS)
def test_diagnostics_deterministic(text):
    messages = set()
    for _ in range(3):
        with pytest.raises(DSLError) as info:
            parse_model(text)
        messages.add(str(info.value))
    assert len(messages) == 1


def test_duplicate_and_reserved_names():
    with pytest.raises(DSLError):
        parse_model('model "a" { independent t; dependent t; }')
    with pytest.raises(DSLError):
        parse_model('model "a" { independent t; dependent D; }')


def test_precedence():
    B = Bundle(["t"], ["u"])
    u = B.field("u")
    assert parse_expr("-u^2", B) == -(u**2)
    assert parse_expr("2^3^2", B).as_constant() == 512
    assert parse_expr("1/2*u", B) == u / 2
    assert parse_expr("u - u - u", B) == -u
    assert parse_expr("sin(0) + cos(u)", B) == u.cos()
    for bad in ("u/u", "u^-1", "u^(1/2)", "(u", "u u"):
        with pytest.raises(DSLError):
            parse_expr(bad, B)


def test_operator_entries():
    B = Bundle(["t", "x"], ["u"])
    op = parse_operator("D[t] - 2*u*D[x,x] + 3, (-1/2)*D[t]", B, 2)
    assert format_op(op, B) == "(-2*u)*D[x,x] + D[t] + (3), (-1/2)*D[t]"
    assert parse_operator(format_op(op, B), B, 2) == op
    with pytest.raises(DSLError):
        parse_operator("D[t]*u", B, 1)


def test_forms_round_trip(maxwell):
    from vps.varcalc import legendre_form, presymplectic_current

    B = maxwell.bundle
    L = maxwell.lagrangian()
    for F in (legendre_form(L).form, presymplectic_current(L).form):
        assert parse_form(format_form(F, B), B, F.p, F.q) == F
    assert parse_form("dx(x) ^ w(A0)", B, 1, 1) == -parse_form("w(A0) ^ dx(x)", B, 1, 1)


@pytest.mark.parametrize("path", sorted(MODELS.glob("*.vps")), ids=lambda p: p.name)
def test_corpus_round_trip(path):
    once = print_model(parse_model(path.read_text(encoding="utf-8")))
    assert print_model(parse_model(once)) == once


def test_corpus_size():
    assert len(list(MODELS.glob("*.vps"))) >= 6
