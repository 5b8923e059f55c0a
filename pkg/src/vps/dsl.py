"""Model files (``.vps``): lexer, precedence-climbing parser and printer.

A model file looks like::

    version 1;
    model "oscillator" {
      independent t;
      dependent u;
      lagrangian L = 1/2*u[t]^2 - 1/2*u^2;
      symmetry timeshift { chi[u] = u[t]; }
      solved { u[t,t] = -u; }
    }

Jet variables are written ``u[t,x,x]``.  The suffix form ``u_txx`` is
accepted only when every independent variable has a one-letter name, because
otherwise a suffix like ``x1`` could be split in more than one way.

:func:`print_model` produces the canonical text and ``parse_model`` of that
text gives the same model back.  Witness strings produced by the CLI re-parse
with :func:`parse_expr`, :func:`parse_form` and :func:`parse_operator`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .jetcalc import BigradedForm, EvolField, wedge
from .linop import LinDiffOp, format_op
from .symexpr import JET, ONE, ZERO, Bundle, Expr
from .varcalc import Lagrangian

KEYWORDS = frozenset(
    {"model", "version", "independent", "dependent", "constant", "lagrangian", "symmetry", "operator", "solved"}
)
FUNCTIONS = {"sin": Expr.sin, "cos": Expr.cos, "exp": Expr.exp}
# names that carry meaning inside expressions, operator bodies or form text
RESERVED = KEYWORDS | set(FUNCTIONS) | {"D", "chi", "w", "dx"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<number>\d+(\.\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<punct>[{}()\[\];,=+\-*/^])
    """,
    re.VERBOSE,
)


class DSLError(ValueError):
    """Diagnostic with a 1-based position and the set of tokens that would have fitted."""

    def __init__(self, message: str, line: int, col: int, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        text = f"line {line}, col {col}: {message}"
        if self.expected:
            text += "; expected one of: " + ", ".join(self.expected)
        super().__init__(text)


@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, string, punct, eof
    text: str
    line: int
    col: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# ----------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class OperatorDecl:
    name: str
    params: tuple
    op: LinDiffOp


@dataclass
class Model:
    name: str
    bundle: Bundle
    lagrangians: dict = field(default_factory=dict)
    symmetries: dict = field(default_factory=dict)
    operators: dict = field(default_factory=dict)
    solved_forms: dict | None = None
    version: int | None = None

    def lagrangian(self, name: str | None = None) -> Lagrangian:
        if name is None:
            if len(self.lagrangians) != 1:
                raise KeyError("model has several Lagrangians; pick one by name")
            return next(iter(self.lagrangians.values()))
        try:
            return self.lagrangians[name]
        except KeyError:
            raise KeyError(f"model {self.name!r} has no Lagrangian {name!r}") from None

    def symmetry(self, name: str) -> EvolField:
        try:
            return self.symmetries[name]
        except KeyError:
            raise KeyError(f"model {self.name!r} has no symmetry {name!r}") from None

    def operator(self, name: str) -> OperatorDecl:
        try:
            return self.operators[name]
        except KeyError:
            raise KeyError(f"model {self.name!r} has no operator {name!r}") from None

    def equations(self, lagrangian: str | None = None):
        """Equation ideal of a Lagrangian, using the declared solved forms if any."""
        from .onshell import EquationSystem

        L = self.lagrangian(lagrangian)
        if self.solved_forms:
            from .varcalc import euler_lagrange

            return EquationSystem(euler_lagrange(L), L.n, self.solved_forms)
        return EquationSystem.from_lagrangian(L)

    def gauge(self, name: str):
        from .noether import GaugeOperator

        decl = self.operator(name)
        return GaugeOperator(decl.op, self.bundle, decl.params)


# ----------------------------------------------------------------------------
# parser


_BINARY = {"+": (1, "left"), "-": (1, "left"), "*": (2, "left"), "/": (2, "left"), "^": (4, "right")}
_UNARY_PREC = 3  # -u^2 is -(u^2), -a*b is (-a)*b


class _DMarker:
    """``D[...]`` inside an operator entry."""

    def __init__(self, counts):
        self.counts = counts


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.bundle: Bundle | None = None

    # token plumbing ---------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[min(self.pos, len(self.tokens) - 1)]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None, expected=()):
        tok = tok or self.tok
        raise DSLError(message, tok.line, tok.col, expected)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "ident") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"unexpected {self.tok.describe()}", expected=[repr(text)])
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.error(f"unexpected {self.tok.describe()}", expected=[what])
        return self.advance()

    def new_name(self, taken: set) -> Token:
        t = self.expect_kind("ident", "identifier")
        if t.text in RESERVED:
            self.error(f"{t.text!r} is reserved and cannot be used as a name", t)
        if t.text in taken:
            self.error(f"duplicate name {t.text!r}", t)
        return t

    def need_bundle(self) -> Bundle:
        if self.bundle is None:
            self.error("independent and dependent variables must be declared first")
        return self.bundle

    # expressions ------------------------------------------------------------
    def expression(self, min_prec: int = 1, allow_d: bool = False):
        lhs = self.unary(allow_d)
        while self.tok.kind == "punct" and self.tok.text in _BINARY:
            op = self.tok
            prec, assoc = _BINARY[op.text]
            if prec < min_prec:
                break
            self.advance()
            rhs = self.expression(prec + 1 if assoc == "left" else prec, allow_d)
            lhs = self._binary(op, lhs, rhs)
        return lhs

    def unary(self, allow_d: bool):
        if self.at("-"):
            op = self.advance()
            value = self.expression(_UNARY_PREC, allow_d)
            if isinstance(value, _DMarker):
                self.error("a total derivative needs a coefficient on its left", op)
            return -value
        return self.primary(allow_d)

    def _binary(self, op: Token, lhs, rhs):
        if isinstance(lhs, _DMarker) or isinstance(rhs, _DMarker):
            self.error(f"D[...] cannot be combined with {op.text!r} here", op)
        if op.text == "+":
            return lhs + rhs
        if op.text == "-":
            return lhs - rhs
        if op.text == "*":
            return lhs * rhs
        if op.text == "/":
            c = rhs.as_constant()
            if c is None or c == 0:
                self.error("division is only allowed by a nonzero rational number", op)
            return lhs * (1 / c)
        c = rhs.as_constant()
        if c is None or c.denominator != 1 or c < 0:
            self.error("exponents must be non-negative integers", op)
        return lhs ** int(c)

    def primary(self, allow_d: bool):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Expr.const(Fraction(t.text))
        if self.at("("):
            self.advance()
            e = self.expression()
            self.expect(")")
            return e
        if t.kind == "ident":
            if t.text in FUNCTIONS:
                self.advance()
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return FUNCTIONS[t.text](arg)
            if t.text == "D" and allow_d:
                self.advance()
                return _DMarker(self.index_list())
            return self.variable()
        self.error(f"unexpected {t.describe()}", expected=["number", "identifier", "'('", "'-'"])

    def index_list(self) -> tuple:
        B = self.need_bundle()
        self.expect("[")
        names = [self._independent(self.expect_kind("ident", "independent variable"))]
        while self.at(","):
            self.advance()
            names.append(self._independent(self.expect_kind("ident", "independent variable")))
        self.expect("]")
        return B.counts(*names)

    def _independent(self, t: Token) -> str:
        if t.text not in self.need_bundle().independent:
            self.error(f"undeclared independent variable {t.text!r}", t)
        return t.text

    def jet_variable(self) -> tuple:
        """A jet variable written as a field name, bracket form or suffix form."""
        e = self.variable()
        keys = [k for k in e.atoms() if k[0] == JET]
        if len(e.terms) != 1 or len(keys) != 1 or e != Expr.atom(keys[0]):
            self.error("expected a jet variable such as u or u[t,x]", self.tokens[self.pos - 1])
        return keys[0]

    def variable(self) -> Expr:
        B = self.need_bundle()
        t = self.expect_kind("ident", "identifier")
        name = t.text
        if name in B.dependent:
            if self.at("["):
                return Expr.jet(B.field_index(name), self.index_list())
            return B.field(name)
        if name in B.independent or name in B.constants:
            return B.symbol(name)
        if "_" in name:
            base, suffix = name.split("_", 1)
            if base in B.dependent and suffix:
                if any(len(s) != 1 for s in B.independent):
                    self.error(
                        f"jet suffix {name!r} is ambiguous with multi-letter independent names;"
                        f" write {base}[...] instead",
                        t,
                    )
                for letter in suffix:
                    if letter not in B.independent:
                        self.error(f"undeclared identifier {letter!r} in jet suffix of {name!r}", t)
                return Expr.jet(B.field_index(base), B.counts(*suffix))
        self.error(f"undeclared identifier {name!r}", t)

    # model ------------------------------------------------------------------
    def model(self) -> Model:
        version = None
        if self.at("version"):
            self.advance()
            v = self.expect_kind("number", "number")
            if v.text != "1":
                self.error(f"unsupported grammar version {v.text}", v)
            version = 1
            self.expect(";")
        self.expect("model")
        name = self.expect_kind("string", "string")
        self.expect("{")
        decls = {"independent": [], "dependent": [], "constant": []}
        taken: set = set()
        M = None
        while not self.at("}"):
            t = self.tok
            if t.kind == "ident" and t.text in decls:
                if M is not None:
                    self.error(f"{t.text!r} declarations must come before their use", t)
                self.advance()
                names = [self.new_name(taken).text]
                taken.add(names[0])
                while self.tok.kind == "ident":
                    names.append(self.new_name(taken).text)
                    taken.add(names[-1])
                self.expect(";")
                decls[t.text].extend(names)
                continue
            if M is None:
                if not decls["independent"] or not decls["dependent"]:
                    self.error("a model needs independent and dependent declarations first", t)
                self.bundle = Bundle(decls["independent"], decls["dependent"], decls["constant"])
                M = Model(name.text[1:-1], self.bundle, version=version)
            if self.at("lagrangian"):
                self.advance()
                key = self.new_name(taken)
                taken.add(key.text)
                self.expect("=")
                M.lagrangians[key.text] = Lagrangian(self.bundle, self.expression())
                self.expect(";")
            elif self.at("symmetry"):
                self.advance()
                key = self.new_name(taken)
                taken.add(key.text)
                M.symmetries[key.text] = self.symmetry_body()
            elif self.at("operator"):
                self.advance()
                key = self.new_name(taken)
                taken.add(key.text)
                self.expect("(")
                params = [self.new_name(set()).text]
                while self.tok.kind == "ident":
                    params.append(self.new_name(set(params)).text)
                self.expect(")")
                self.expect("{")
                op = self.operator_body(len(params), closing="}")
                self.expect("}")
                M.operators[key.text] = OperatorDecl(key.text, tuple(params), op)
            elif self.at("solved"):
                if M.solved_forms is not None:
                    self.error("only one solved block is allowed")
                self.advance()
                M.solved_forms = self.solved_body()
            else:
                self.error(
                    f"unexpected {t.describe()}",
                    expected=["'}'", "'lagrangian'", "'symmetry'", "'operator'", "'solved'"]
                    + ([] if M.lagrangians or M.symmetries or M.operators else ["'independent'", "'dependent'", "'constant'"]),
                )
        closing = self.expect("}")
        if M is None:
            if not decls["independent"] or not decls["dependent"]:
                self.error("a model needs independent and dependent declarations", closing)
            M = Model(name.text[1:-1], Bundle(decls["independent"], decls["dependent"], decls["constant"]), version=version)
        self.expect_kind("eof", "end of input")
        return M

    def symmetry_body(self) -> EvolField:
        B = self.need_bundle()
        self.expect("{")
        comps = [ZERO] * B.m
        seen = set()
        while True:
            self.expect("chi")
            self.expect("[")
            t = self.expect_kind("ident", "field name")
            if t.text not in B.dependent:
                self.error(f"undeclared field {t.text!r}", t)
            if t.text in seen:
                self.error(f"component chi[{t.text}] given twice", t)
            seen.add(t.text)
            self.expect("]")
            self.expect("=")
            comps[B.field_index(t.text)] = self.expression()
            self.expect(";")
            if self.at("}"):
                break
            if not self.at("chi"):
                self.error(f"unexpected {self.tok.describe()}", expected=["'chi'", "'}'"])
        self.advance()
        return EvolField(comps)

    def solved_body(self) -> dict:
        self.expect("{")
        out = {}
        while True:
            t = self.tok
            k = self.jet_variable()
            if k in out:
                self.error("jet variable solved twice", t)
            self.expect("=")
            out[k] = self.expression()
            self.expect(";")
            if self.at("}"):
                break
        self.advance()
        return out

    def operator_body(self, cols: int, closing: str | None) -> LinDiffOp:
        """Rows separated (and optionally terminated) by ';', entries by ','."""
        B = self.need_bundle()
        rows = []
        while True:
            row = [self.operator_entry()]
            while self.at(","):
                self.advance()
                row.append(self.operator_entry())
            if len(row) != cols:
                self.error(f"operator row has {len(row)} entries, expected {cols}")
            rows.append(row)
            if self.at(";"):
                self.advance()
            end = self.tok.kind == "eof" if closing is None else self.at(closing)
            if end:
                break
            if self.tokens[self.pos - 1].text != ";":
                self.error(f"unexpected {self.tok.describe()}", expected=["';'", "','"])
        return LinDiffOp(B.n, rows)

    def operator_entry(self) -> dict:
        """``c1*D[t,t] - c2*D[x] + c3``."""
        entry: dict = {}
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        elif self.at("+"):
            self.advance()
        while True:
            coeff, counts = self.operator_term()
            entry[counts] = entry.get(counts, ZERO) + coeff * sign
            if self.at("+"):
                sign = 1
            elif self.at("-"):
                sign = -1
            else:
                break
            self.advance()
        return {I: c for I, c in entry.items() if c.terms}

    def operator_term(self):
        """One term: factors joined by ``*`` (or ``/`` by a number), ``D[...]`` last."""
        zero = tuple([0] * self.need_bundle().n)
        coeff = ONE
        while True:
            value = self.expression(_UNARY_PREC, allow_d=True)
            if isinstance(value, _DMarker):
                if self.at("*") or self.at("/"):
                    self.error("D[...] must be the last factor of a term")
                return coeff, value.counts
            coeff = coeff * value
            if self.at("*"):
                self.advance()
            elif self.at("/"):
                op = self.advance()
                coeff = self._binary(op, coeff, self.expression(_UNARY_PREC))
                if not (self.at("*") or self.at("/")):
                    return coeff, zero
                if self.at("*"):
                    self.advance()
            else:
                return coeff, zero

    # differential forms -----------------------------------------------------
    def form(self, p: int, q: int) -> BigradedForm:
        B = self.need_bundle()
        if self.tok.kind == "number" and self.tok.text == "0" and self.peek().kind == "eof":
            self.advance()
            return BigradedForm.zero(B.n, p, q)
        total = BigradedForm.zero(B.n, p, q)
        while True:
            sign = 1
            if self.at("-"):
                self.advance()
                sign = -1
            start = self.tok
            term = self.form_term()
            if term.bidegree != (p, q):
                self.error(f"term has bidegree {term.bidegree}, expected {(p, q)}", start)
            total = total + (term if sign > 0 else -term)
            if self.at("+") or self.at("-"):
                if self.at("+"):
                    self.advance()
                continue
            return total

    def form_term(self) -> BigradedForm:
        B = self.need_bundle()
        coeff = ONE
        if self.at("("):
            self.advance()
            coeff = self.expression()
            self.expect(")")
            if not (self.at("*")):
                return BigradedForm.function(B.n, coeff)
            self.advance()
        acc = BigradedForm.function(B.n, coeff)
        while True:
            acc = wedge(acc, self.form_factor())
            if not self.at("^"):
                return acc
            self.advance()

    def form_factor(self) -> BigradedForm:
        B = self.need_bundle()
        if self.at("w"):
            self.advance()
            self.expect("(")
            k = self.jet_variable()
            self.expect(")")
            return BigradedForm(B.n, 1, 0, {((k,), ()): ONE})
        if self.at("dx"):
            self.advance()
            self.expect("(")
            i = B.index_of(self._independent(self.expect_kind("ident", "independent variable")))
            self.expect(")")
            return BigradedForm.dx(B.n, i)
        self.error(f"unexpected {self.tok.describe()}", expected=["'w'", "'dx'"])


# ----------------------------------------------------------------------------
# entry points


def parse_model(text: str) -> Model:
    return Parser(text).model()


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _fragment(text: str, bundle: Bundle) -> Parser:
    P = Parser(text)
    P.bundle = bundle
    return P


def parse_expr(text: str, bundle: Bundle) -> Expr:
    P = _fragment(text, bundle)
    e = P.expression()
    P.expect_kind("eof", "end of input")
    return e


def parse_form(text: str, bundle: Bundle, p: int, q: int) -> BigradedForm:
    P = _fragment(text, bundle)
    F = P.form(p, q)
    P.expect_kind("eof", "end of input")
    return F


def parse_operator(text: str, bundle: Bundle, cols: int) -> LinDiffOp:
    P = _fragment(text, bundle)
    op = P.operator_body(cols, closing=None)
    P.expect_kind("eof", "end of input")
    return op


# ----------------------------------------------------------------------------
# printer


def _jet_text(bundle: Bundle, k: tuple) -> str:
    return bundle.atom_name(k)


def print_model(model: Model) -> str:
    B = model.bundle
    fmt = B.format
    lines = []
    if model.version is not None:
        lines.append(f"version {model.version};")
    lines.append(f'model "{model.name}" {{')
    lines.append(f"  independent {' '.join(B.independent)};")
    lines.append(f"  dependent {' '.join(B.dependent)};")
    if B.constants:
        lines.append(f"  constant {' '.join(B.constants)};")
    for name, L in model.lagrangians.items():
        lines.append(f"  lagrangian {name} = {fmt(L.density)};")
    for name, chi in model.symmetries.items():
        lines.append(f"  symmetry {name} {{")
        for a, c in enumerate(chi.components):
            lines.append(f"    chi[{B.dependent[a]}] = {fmt(c)};")
        lines.append("  }")
    for name, decl in model.operators.items():
        lines.append(f"  operator {name} ({' '.join(decl.params)}) {{")
        for row in format_op(decl.op, B).split("; "):
            lines.append(f"    {row};")
        lines.append("  }")
    if model.solved_forms:
        from .onshell import rank

        lines.append("  solved {")
        for k in sorted(model.solved_forms, key=rank):
            lines.append(f"    {_jet_text(B, k)} = {fmt(model.solved_forms[k])};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
