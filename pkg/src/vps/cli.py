"""``vps``: command-line front end.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 64 usage or model-file error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import jetcalc
from .dsl import DSLError, Model, load_model, parse_expr
from .jetcalc import BigradedForm, dbar, dvert, format_form
from .linop import adjoint, format_op, is_complex, linearize
from .noether import (
    NOETHER_SIGN,
    NotSymmetry,
    bracket,
    check_first_noether_symplectic,
    check_infinitesimal_gauge,
    check_noether_gauge_symmetry,
    noether_current,
    noether_identity,
    verify_kernel_direction,
)
from .onshell import Inconclusive, MissingSolvedForm, is_zero_on_shell
from .report import EXIT_USAGE, FAIL, INCONCLUSIVE, PASS, Item, Report, format_certificate
from .symexpr import UnknownVariableError
from .varcalc import (
    UnsupportedExpression,
    euler_lagrange,
    helmholtz_selfadjoint,
    legendre_form,
    presymplectic_current,
    source_form,
)

MODELS = Path(__file__).parent / "models"

SIGN_SHEET = (
    (jetcalc.__doc__ or "").strip()
    + f"""

Derived objects
---------------
* Legendre form: ``dvert(L d^n x) - E(L) = dbar(theta)``, ``theta`` built by
  integration by parts removing the largest coordinate index first.
* Presymplectic current: ``omega = -dvert(theta)``.
* Noether current: ``j = sigma + i_chi theta`` where ``i_chi dvert L = dbar sigma``.
* First Noether theorem: ``dvert j + s * i_chi omega`` is ``dbar``-exact on
  shell with the global sign ``s = {NOETHER_SIGN}``.
* Bracket of charges: ``-i_chi1 i_chi2 omega``.
"""
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("-m", "--model", help="model file, or the name of a bundled model")
    p.add_argument("-L", "--lagrangian", help="Lagrangian name (optional if the model has one)")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--order-bound", type=int, default=None, metavar="N", help="prolongation bound for on-shell checks")
    p.add_argument("--seed", type=int, default=None, metavar="N", help="seed for randomized suites")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="vps", description="Variational bicomplex and covariant phase space checks.", parents=[common])
    parser.add_argument("--sign-sheet", action="store_true", help="print the sign conventions and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    add("el", "Euler-Lagrange expressions")
    add("linearize", "universal linearization of the Euler-Lagrange expressions")
    p = add("adjoint", "formal adjoint of an operator (default: the linearization)")
    p.add_argument("--operator", help="operator declared in the model")
    add("legendre", "Legendre form theta")
    add("omega", "presymplectic current omega and its closure identity")
    p = add("helmholtz", "self-adjointness of the linearized Euler-Lagrange operator")
    p.add_argument("--source", action="append", metavar="EXPR", help="check these source components instead")
    p = add("noether", "Noether current of a symmetry and the first Noether theorem")
    p.add_argument("--symmetry", required=True)
    p = add("identity", "Noether identity of a gauge operator")
    p.add_argument("--operator", required=True)
    p = add("gauge", "gauge symmetry, Noether identity and infinitesimal gauge checks")
    p.add_argument("--operator", required=True)
    p.add_argument("--complex", metavar="OPERATOR", help="also check OPERATOR o l_E = 0")
    p = add("kernel", "kernel direction of omega")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--operator", help="gauge operator, applied to --epsilon")
    group.add_argument("--symmetry", help="a declared symmetry")
    p.add_argument("--epsilon", action="append", metavar="EXPR", help="concrete gauge parameter (one per column)")
    p = add("bracket", "bracket of two Noether charges")
    p.add_argument("--symmetry", action="append", required=True, help="give exactly two")
    p = add("selftest", "run the acceptance suite")
    p.add_argument("--only", type=int, action="append", metavar="K", help="run criterion K only (repeatable)")
    return parser


# ----------------------------------------------------------------------------
# helpers


def resolve_model(name: str | None) -> Model:
    if not name:
        raise UsageError("this command needs -m MODEL")
    path = Path(name)
    if not path.exists():
        bundled = MODELS / f"{name.removesuffix('.vps')}.vps"
        if not bundled.exists():
            raise UsageError(f"no model file {name!r}")
        path = bundled
    return load_model(path)


def _lagrangian(M: Model, args):
    try:
        return M.lagrangian(args.lagrangian)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _lookup(getter, name):
    try:
        return getter(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _tuple_text(B, values) -> str:
    return "(" + ", ".join(B.format(v) for v in values) + ")"


def _verdict_item(v, B) -> Item:
    witness = v.witness
    if isinstance(witness, BigradedForm):
        witness = format_form(witness, B)
    elif isinstance(witness, tuple) and witness and hasattr(witness[0], "terms"):
        witness = _tuple_text(B, witness)
    elif witness is not None and hasattr(witness, "entries"):
        witness = format_op(witness, B)
    elif witness is not None:
        witness = str(witness)
    return Item(v.name, v.status, witness, format_certificate(v.certificate, B), v.detail)


# ----------------------------------------------------------------------------
# commands


def cmd_el(M, args, R):
    R.brief = True
    L = _lagrangian(M, args)
    E = euler_lagrange(L)
    R.text = _tuple_text(M.bundle, E)
    for a, e in enumerate(E):
        R.items.append(Item(f"E[{M.bundle.dependent[a]}]", PASS, M.bundle.format(e)))


def cmd_linearize(M, args, R):
    R.brief = True
    L = _lagrangian(M, args)
    ell = linearize(euler_lagrange(L), L.n, L.m)
    R.text = format_op(ell, M.bundle)
    R.items.append(Item("linearization", PASS, R.text))


def cmd_adjoint(M, args, R):
    if args.operator:
        op = _lookup(M.operator, args.operator).op
    else:
        L = _lagrangian(M, args)
        op = linearize(euler_lagrange(L), L.n, L.m)
    adj = adjoint(op)
    R.text = format_op(adj, M.bundle)
    R.items.append(Item("adjoint", PASS, R.text))
    R.items.append(Item("involution", PASS if adjoint(adj) == op else FAIL))


def cmd_legendre(M, args, R):
    R.brief = True
    L = _lagrangian(M, args)
    theta = legendre_form(L).form  # construction verifies the identity
    R.text = format_form(theta, M.bundle)
    R.items.append(Item("legendre-identity", PASS, R.text))


def cmd_omega(M, args, R):
    L = _lagrangian(M, args)
    omega = presymplectic_current(L).form
    R.text = format_form(omega, M.bundle)
    closure = dbar(omega) + dvert(source_form(L.n, euler_lagrange(L)))
    R.items.append(Item("dbar omega + dvert E = 0", PASS if closure.is_zero() else FAIL, R.text))


def cmd_helmholtz(M, args, R):
    B = M.bundle
    if args.source:
        F = [parse_expr(s, B) for s in args.source]
    else:
        F = euler_lagrange(_lagrangian(M, args))
    ok, witness = helmholtz_selfadjoint(F, B.n, B.m)
    R.items.append(Item("self-adjoint", PASS if ok else FAIL, None if ok else format_op(witness, B)))


def _charge(M, args, L, name):
    chi = _lookup(M.symmetry, name)
    return noether_current(chi, L, M.equations(args.lagrangian), args.order_bound)


def cmd_noether(M, args, R):
    L = _lagrangian(M, args)
    B = M.bundle
    try:
        c = _charge(M, args, L, args.symmetry)
    except NotSymmetry as exc:
        R.items.append(Item("noether-symmetry", FAIL, _tuple_text(B, exc.witness), detail="Euler-Lagrange derivatives of the variation"))
        return
    R.text = format_form(c.current, B)
    R.items.append(Item("noether-symmetry", PASS, format_form(c.sigma, B), detail="sigma"))
    R.items.append(Item("conservation", PASS, R.text, format_certificate(c.conservation, B), "current j"))
    v = check_first_noether_symplectic(c, eqs=M.equations(args.lagrangian), bound=args.order_bound)
    R.items.append(_verdict_item(v, B))


def cmd_identity(M, args, R):
    L = _lagrangian(M, args)
    values, v = noether_identity(_lookup(M.gauge, args.operator), L)
    R.text = _tuple_text(M.bundle, values)
    R.items.append(Item(v.name, v.status, R.text))


def cmd_gauge(M, args, R):
    L = _lagrangian(M, args)
    B = M.bundle
    G = _lookup(M.gauge, args.operator)
    R.items.append(_verdict_item(check_noether_gauge_symmetry(G, L), G.extended))
    values, v = noether_identity(G, L)
    R.items.append(Item(v.name, v.status, _tuple_text(B, values)))
    eqs = M.equations(args.lagrangian)
    R.items.append(_verdict_item(check_infinitesimal_gauge(G, L, eqs, args.order_bound), B))
    if args.complex:
        op = _lookup(M.operator, args.complex).op
        ell = linearize(euler_lagrange(L), L.n, L.m)
        if op.cols != ell.rows:
            raise UsageError(f"operator {args.complex!r} takes {op.cols} inputs, expected {ell.rows}")
        R.items.append(Item("complex", PASS if is_complex(op, ell) else FAIL))


def cmd_kernel(M, args, R):
    L = _lagrangian(M, args)
    B = M.bundle
    if args.operator:
        G = _lookup(M.gauge, args.operator)
        if not args.epsilon or len(args.epsilon) != len(G.params):
            raise UsageError(f"give --epsilon once for each parameter {', '.join(G.params)}")
        chi = G.direction([parse_expr(s, B) for s in args.epsilon])
    else:
        chi = _lookup(M.symmetry, args.symmetry)
    v = verify_kernel_direction(chi, L, M.equations(args.lagrangian), args.order_bound)
    R.items.append(_verdict_item(v, B))


def cmd_bracket(M, args, R):
    if len(args.symmetry) != 2:
        raise UsageError("bracket needs exactly two --symmetry options")
    L = _lagrangian(M, args)
    B = M.bundle
    try:
        c1, c2 = (_charge(M, args, L, name) for name in args.symmetry)
    except NotSymmetry as exc:
        R.items.append(Item("noether-symmetry", FAIL, _tuple_text(B, exc.witness)))
        return
    br = bracket(c1, c2)
    R.text = format_form(br, B)
    R.items.append(Item("antisymmetry", PASS if (br + bracket(c2, c1)).is_zero() else FAIL, R.text))
    eqs = M.equations(args.lagrangian)
    flux = dbar(br).top_coefficient()
    try:
        _, cert = is_zero_on_shell(flux, eqs, args.order_bound)
        R.items.append(Item("closed on shell", PASS, B.format(flux), format_certificate(cert, B)))
    except Inconclusive as exc:
        R.items.append(Item("closed on shell", INCONCLUSIVE, B.format(flux), detail=str(exc)))


COMMANDS = {
    "el": cmd_el,
    "linearize": cmd_linearize,
    "adjoint": cmd_adjoint,
    "legendre": cmd_legendre,
    "omega": cmd_omega,
    "helmholtz": cmd_helmholtz,
    "noether": cmd_noether,
    "identity": cmd_identity,
    "gauge": cmd_gauge,
    "kernel": cmd_kernel,
    "bracket": cmd_bracket,
}


def run(argv=None) -> tuple[int, Report | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.sign_sheet:
        print(SIGN_SHEET)
        return 0, None
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE, None
    start = time.perf_counter()
    if args.command == "selftest":
        from . import selftest

        seed = selftest.DEFAULT_SEED if args.seed is None else args.seed
        R = selftest.run(seed, set(args.only) if args.only else None)
        R.model = args.model or R.model
    else:
        try:
            M = resolve_model(args.model)
            R = Report(args.command, M.name)
            COMMANDS[args.command](M, args, R)
        except (UsageError, DSLError, UnknownVariableError, MissingSolvedForm) as exc:
            print(f"vps {args.command}: {exc}", file=sys.stderr)
            return EXIT_USAGE, None
        except (Inconclusive, UnsupportedExpression) as exc:
            R.items.append(Item(args.command, INCONCLUSIVE, detail=f"{type(exc).__name__}: {exc}"))
        except ValueError as exc:  # e.g. inconsistent solved forms in the model file
            print(f"vps {args.command}: {exc}", file=sys.stderr)
            return EXIT_USAGE, None
    R.ms = int((time.perf_counter() - start) * 1000)
    print(R.to_json() if args.json else R.to_text())
    return R.exit_code, R


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
