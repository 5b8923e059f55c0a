"""The acceptance suite behind ``vps selftest``.

Ten criteria, each an exact check on seeded random data or on the bundled
models.  A criterion reports ``fail`` with the first counterexample it meets.
"""

from __future__ import annotations

import random
import time
from pathlib import Path

from . import randgen
from .dsl import DSLError, load_model, parse_expr, parse_form, parse_model, parse_operator, print_model
from .jetcalc import BigradedForm, contract, dbar, dvert, format_form, lie, total_derivative, wedge
from .linop import adjoint, apply, compose, format_op, green_remainder, is_complex, linearize, pairing_density
from .noether import (
    NOETHER_SIGN,
    bracket,
    check_first_noether_symplectic,
    check_infinitesimal_gauge,
    check_noether_gauge_symmetry,
    noether_current,
    noether_identity,
    verify_kernel_direction,
)
from .onshell import EquationSystem, Inconclusive, is_dbar_exact_on_shell, is_zero_on_shell, multi_indices
from .report import FAIL, INCONCLUSIVE, PASS, Item, Report
from .symexpr import Expr
from .varcalc import (
    euler_lagrange,
    euler_lagrange_density,
    helmholtz_selfadjoint,
    legendre_form,
    presymplectic_current,
    source_form,
)

MODELS = Path(__file__).parent / "models"
DEFAULT_SEED = 20240601


def model(name: str):
    return load_model(MODELS / f"{name}.vps")


def _vanishes(*forms: BigradedForm) -> bool:
    """Sum of forms is zero (bidegree bookkeeping of zero forms ignored)."""
    acc: dict = {}
    for F in forms:
        for b, c in F.terms.items():
            acc[b] = acc[b] + c if b in acc else c
    return all(not c.terms for c in acc.values())


class _Failure(Exception):
    def __init__(self, witness: str):
        super().__init__(witness)
        self.witness = witness


def _require(ok: bool, witness: str):
    if not ok:
        raise _Failure(witness)


def bicomplex_laws(rng: random.Random, trials: int = 50) -> str:
    for t in range(trials):
        n, m = rng.choice((1, 2)), rng.choice((1, 2))
        p, q = rng.randint(0, 2), rng.randint(0, n)
        F = randgen.form(rng, n, m, p, q, max_order=3)
        G = randgen.form(rng, n, m, rng.randint(0, 1), rng.randint(0, n), max_order=2)
        chi = randgen.field(rng, n, m, max_order=1)
        where = f"trial {t}: {format_form(F)}"
        _require(dbar(dbar(F)).is_zero(), "dbar^2 != 0 at " + where)
        _require(dvert(dvert(F)).is_zero(), "dvert^2 != 0 at " + where)
        _require(_vanishes(dbar(dvert(F)), dvert(dbar(F))), "dbar dvert + dvert dbar != 0 at " + where)
        f = randgen.expr(rng, n, m, 2)
        for i in range(n):
            for j in range(n):
                _require(
                    total_derivative(total_derivative(f, i), j) == total_derivative(total_derivative(f, j), i),
                    f"[D_{i}, D_{j}] != 0 on trial {t}",
                )
        _require(_vanishes(contract(chi, dbar(F)), dbar(contract(chi, F))), "i dbar + dbar i != 0 at " + where)
        _require(
            _vanishes(lie(chi, F), -contract(chi, dvert(F)), -dvert(contract(chi, F))),
            "lie != i dvert + dvert i at " + where,
        )
        if F.q + G.q <= n:
            sign = -1 if (F.p + F.q) % 2 else 1
            _require(
                _vanishes(
                    contract(chi, wedge(F, G)),
                    -wedge(contract(chi, F), G),
                    -wedge(F, contract(chi, G)).scale(Expr.const(sign)),
                ),
                "contraction is not a graded derivation at " + where,
            )
    return f"{trials} random forms"


def null_lagrangians(rng: random.Random, trials: int = 25) -> str:
    for t in range(trials):
        n, m = rng.choice((1, 2)), rng.choice((1, 2))
        f = randgen.expr(rng, n, m, 2, terms=3, degree=3)
        total = Expr.const(0)
        for i in range(n):
            Df = total_derivative(f, i)
            total = total + Df * (i + 1)
            _require(all(not e.terms for e in euler_lagrange_density(Df, m)), f"E(D_{i} f) != 0 for f = {f}")
        _require(all(not e.terms for e in euler_lagrange_density(total, m)), f"E(sum D_i f) != 0 for f = {f}")
    return f"{trials} random f"


def helmholtz(rng: random.Random, trials: int = 25) -> str:
    for t in range(trials):
        n, m = rng.choice((1, 2)), rng.choice((1, 2))
        L = randgen.lagrangian_density(rng, n, m, 2)
        ok, witness = helmholtz_selfadjoint(euler_lagrange_density(L, m), n, m)
        _require(ok, f"linearized E(L) not self-adjoint for L = {L}: {witness}")
    for name in ("klein_gordon", "maxwell2d"):
        L = model(name).lagrangian()
        ok, witness = helmholtz_selfadjoint(euler_lagrange(L), L.n, L.m)
        _require(ok, f"{name}: {witness}")
    return f"{trials} random L, Klein-Gordon, Maxwell"


def adjoint_algebra(rng: random.Random, trials: int = 25) -> str:
    for t in range(trials):
        n, m = rng.choice((1, 2)), rng.choice((1, 2))
        r, c, k = rng.randint(1, 2), rng.randint(1, 2), rng.randint(1, 2)
        A = randgen.operator(rng, n, r, c, m)
        B = randgen.operator(rng, n, k, r, m)
        _require(adjoint(adjoint(A)) == A, f"adjoint is not an involution on {format_op(A)}")
        _require(
            adjoint(compose(B, A)) == compose(adjoint(A), adjoint(B)),
            f"(B A)+ != A+ B+ for A = {format_op(A)}, B = {format_op(B)}",
        )
    for t in range(trials):
        n, m = rng.choice((1, 2)), 2
        r, c = rng.randint(1, 2), rng.randint(1, 2)
        op = randgen.operator(rng, n, r, c, m)
        p = [randgen.expr(rng, n, m, 1, terms=2, degree=2) for _ in range(c)]
        qd = [randgen.expr(rng, n, m, 1, terms=2, degree=2) for _ in range(r)]
        G = green_remainder(op, p, qd)
        diff = pairing_density(qd, apply(op, p)) - pairing_density(apply(adjoint(op), qd), p)
        _require(dbar(G) == BigradedForm.top(n, diff), f"Green remainder fails for {format_op(op)}")
    return f"{trials} operator pairs, {trials} Green triples"


def legendre_zuckerman(rng: random.Random, lambdas: int = 5) -> str:
    for name in ("oscillator", "klein_gordon", "maxwell2d"):
        M = model(name)
        L = M.lagrangian()
        E = euler_lagrange(L)
        theta = legendre_form(L).form
        _require(dvert(L.form()) - source_form(L.n, E) == dbar(theta), f"{name}: Legendre identity")
        omega = presymplectic_current(L).form
        _require(_vanishes(dbar(omega), dvert(source_form(L.n, E))), f"{name}: dbar omega + dvert E != 0")
        if L.n < 2:
            continue  # no (1, n-2)-forms to shift theta by
        eqs = M.equations()
        for _ in range(lambdas):
            lam = randgen.form(rng, L.n, L.m, 1, L.n - 2, max_order=1, terms=2)
            other = presymplectic_current(L, theta + dbar(lam)).form
            try:
                _, cert = is_dbar_exact_on_shell(other - omega, eqs)
            except Inconclusive:
                raise _Failure(f"{name}: theta-independence inconclusive for lambda = {format_form(lam)}")
    return f"oscillator, Klein-Gordon, Maxwell; {lambdas} shifts of theta each (n = 2)"


def first_noether(rng: random.Random) -> str:
    osc, kg = model("oscillator"), model("klein_gordon")
    charges = [
        ("oscillator energy", noether_current(osc.symmetry("timeshift"), osc.lagrangian(), osc.equations()), osc),
        ("Klein-Gordon energy", noether_current(kg.symmetry("energy"), kg.lagrangian(), kg.equations()), kg),
        ("Klein-Gordon momentum", noether_current(kg.symmetry("momentum"), kg.lagrangian(), kg.equations()), kg),
    ]
    for label, c, M in charges:
        _require(c.verify(M.equations()), f"{label}: charge certificate does not verify")
        v = check_first_noether_symplectic(c, eqs=M.equations(), sign=NOETHER_SIGN)
        _require(v.passed, f"{label}: first Noether check {v.status} with sign {NOETHER_SIGN}")
    # the sign is falsifiable: the opposite one must not pass
    c = charges[0][1]
    v = check_first_noether_symplectic(c, eqs=osc.equations(), sign=-NOETHER_SIGN)
    _require(not v.passed, "first Noether check passes with both signs")
    return f"three charges, shared sign {NOETHER_SIGN}"


def gauge_sector(rng: random.Random) -> str:
    M = model("maxwell2d")
    L = M.lagrangian()
    G = M.gauge("grad")
    _require(check_noether_gauge_symmetry(G, L).passed, "gradient is not a Noether gauge symmetry")
    values, v = noether_identity(G, L)
    _require(v.passed, f"Noether identity does not vanish: {values}")
    v = check_infinitesimal_gauge(G, L, M.equations())
    _require(v.passed and "identically" in v.detail, f"infinitesimal gauge check: {v.status} {v.detail}")
    div = M.operator("div").op
    _require(is_complex(div, linearize(euler_lagrange(L), L.n, L.m)), "div o l_E != 0")
    t, x = M.bundle.coord("t"), M.bundle.coord("x")
    v = verify_kernel_direction(G.direction([t * x]), L, M.equations())
    _require(v.passed, f"kernel direction eps = t*x: {v.status}")
    return "gauge symmetry, identity, compositions, complex, kernel direction"


def brackets(rng: random.Random) -> str:
    osc, kg = model("oscillator"), model("klein_gordon")
    E = noether_current(kg.symmetry("energy"), kg.lagrangian(), kg.equations())
    P = noether_current(kg.symmetry("momentum"), kg.lagrangian(), kg.equations())
    H = noether_current(osc.symmetry("timeshift"), osc.lagrangian(), osc.equations())
    for c in (E, P, H):
        _require(bracket(c, c).is_zero(), "bracket(c, c) != 0")
    for a, b in ((E, P), (P, E)):
        _require((bracket(a, b) + bracket(b, a)).is_zero(), "bracket is not antisymmetric")
    eqs = kg.equations()
    flux = dbar(bracket(E, P)).top_coefficient()
    ok, cert = is_zero_on_shell(flux, eqs)
    _require(ok and cert.reproduces(flux, eqs), "energy-momentum bracket is not closed on shell")
    return "self-brackets, antisymmetry, Klein-Gordon energy-momentum closure"


def onshell_soundness(rng: random.Random, trials: int = 25) -> str:
    osc = model("oscillator")
    eqs = osc.equations()
    bare = EquationSystem(eqs.generators, eqs.n)  # no solved forms: ansatz only
    E = eqs.generators[0]
    for t in range(trials):
        e = Expr.const(0)
        for J in multi_indices(1, 2):
            if rng.random() < 0.7:
                e = e + randgen.expr(rng, 1, 1, 2, terms=2, degree=2) * eqs.prolonged(0, J)
        if not e.terms:
            e = E
        bound = max(e.order() - 1, 1)
        for method, system in (("reduce", eqs), ("ansatz", bare)):
            try:
                ok, cert = is_zero_on_shell(e, system, bound, method=method)
            except Inconclusive:
                raise _Failure(f"{method} path inconclusive on ideal member {e}")
            _require(ok and cert.reproduces(e, eqs), f"{method} certificate does not reproduce {e}")
        _require(not eqs.reduce(e).terms, f"reduce does not send ideal member {e} to zero")
    return f"{trials} random ideal members, both paths"


BAD_INPUTS = (
    'model "a" { independent x1 x2; dependent u; lagrangian L = u_x1; }',
    'model "a" { independent t; dependent u; lagrangian L = u_q; }',
    'model "a" { independent t; dependent u; lagrangian L = u_t +; }',
    'model "a" { independent t; dependent u; lagrangian L = u/u; }',
    'model "a" { independent t; dependent u; bogus }',
    'model "a" { independent t; dependent u; lagrangian L = u^u; }',
    'model "a" { dependent u; }',
    'model "a" { independent t; dependent u; lagrangian L = u $ 2; }',
)


def dsl_roundtrip(rng: random.Random) -> str:
    files = sorted(MODELS.glob("*.vps"))
    _require(len(files) >= 6, f"corpus has only {len(files)} files")
    for path in files:
        once = print_model(parse_model(path.read_text(encoding="utf-8")))
        _require(print_model(parse_model(once)) == once, f"round trip changes {path.name}")
        M = parse_model(once)
        B = M.bundle
        for L in M.lagrangians.values():
            for e in euler_lagrange(L):
                _require(parse_expr(B.format(e), B) == e, f"{path.name}: EL witness does not re-parse")
            ell = linearize(euler_lagrange(L), L.n, L.m)
            _require(parse_operator(format_op(ell, B), B, ell.cols) == ell, f"{path.name}: operator text")
            theta = legendre_form(L).form
            _require(parse_form(format_form(theta, B), B, theta.p, theta.q) == theta, f"{path.name}: form text")
    for text in BAD_INPUTS:
        messages = []
        for _ in range(2):
            try:
                parse_model(text)
            except DSLError as exc:
                messages.append(str(exc))
        _require(len(messages) == 2 and messages[0] == messages[1], f"diagnostic missing or unstable for {text!r}")
    return f"{len(files)} model files, {len(BAD_INPUTS)} diagnostics"


CRITERIA = (
    ("1 bicomplex laws", bicomplex_laws),
    ("2 null Lagrangians", null_lagrangians),
    ("3 Helmholtz self-adjointness", helmholtz),
    ("4 adjoint algebra and Green formula", adjoint_algebra),
    ("5 Legendre and presymplectic identities", legendre_zuckerman),
    ("6 first Noether theorem", first_noether),
    ("7 gauge sector", gauge_sector),
    ("8 bracket of charges", brackets),
    ("9 on-shell engine soundness", onshell_soundness),
    ("10 model language", dsl_roundtrip),
)


def run_criterion(index: int, seed: int = DEFAULT_SEED) -> Item:
    name, fn = CRITERIA[index]
    rng = random.Random(f"{seed}:{index}")
    start = time.perf_counter()
    try:
        detail = fn(rng)
        status, witness = PASS, None
    except _Failure as exc:
        status, witness, detail = FAIL, exc.witness, ""
    except Inconclusive as exc:
        status, witness, detail = INCONCLUSIVE, str(exc), ""
    ms = int((time.perf_counter() - start) * 1000)
    return Item(name, status, witness, detail=f"{detail} ({ms} ms)" if detail else f"{ms} ms")


def run(seed: int = DEFAULT_SEED, only=None) -> Report:
    start = time.perf_counter()
    report = Report("selftest", "bundled corpus")
    for i in range(len(CRITERIA)):
        if only is None or i + 1 in only:
            report.items.append(run_criterion(i, seed))
    report.ms = int((time.perf_counter() - start) * 1000)
    return report
