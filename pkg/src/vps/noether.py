"""Noether symmetries, currents, gauge operators and the charge bracket.

With the anticommuting conventions of :mod:`vps.jetcalc` the Legendre
identity gives ``dbar(sigma + i_chi theta) = <E(L), chi> d^n x``, so the
current attached to ``sigma`` is ``j = sigma + i_chi theta``.  The symplectic
form of the first Noether theorem then reads ``dvert j + s * i_chi omega = 0``
on shell modulo ``dbar``-exact forms, with the global sign :data:`NOETHER_SIGN`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .jetcalc import BigradedForm, EvolField, contract, dbar, dvert
from .linop import LinDiffOp, adjoint, apply, compose, linearize
from .onshell import (
    Certificate,
    EquationSystem,
    Inconclusive,
    is_dbar_exact_on_shell,
    is_zero_on_shell,
)
from .symexpr import Bundle, Expr
from .varcalc import (
    Lagrangian,
    NotExact,
    euler_lagrange,
    legendre_form,
    presymplectic_current,
    split_divergence,
)

# fixed once on the harmonic oscillator; every model must agree with it
NOETHER_SIGN = -1

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Verdict:
    name: str
    status: str
    witness: object = None
    certificate: Certificate | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.status == PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS


class NotSymmetry(Exception):
    """``E(i_chi dvert L)`` is nonzero; ``witness`` holds those expressions."""

    def __init__(self, witness):
        super().__init__("not a Noether symmetry")
        self.witness = tuple(witness)


def _field(chi) -> EvolField:
    return chi if isinstance(chi, EvolField) else EvolField(chi)


def prolonged_action(chi, L: Lagrangian) -> BigradedForm:
    """``i_{E_chi} dvert(L d^n x)``."""
    return contract(_field(chi), dvert(L.form()))


def check_noether_symmetry(chi, L: Lagrangian) -> BigradedForm:
    """Return ``sigma`` with ``i_{E_chi} dvert L = dbar sigma``; raise NotSymmetry."""
    T = prolonged_action(chi, L)
    try:
        return split_divergence(T)
    except NotExact as exc:
        raise NotSymmetry(exc.witness) from None


@dataclass
class NoetherCharge:
    lagrangian: Lagrangian
    symmetry: EvolField
    sigma: BigradedForm
    current: BigradedForm
    conservation: Certificate

    def verify(self, eqs: EquationSystem) -> bool:
        L, chi = self.lagrangian, self.symmetry
        if dbar(self.sigma) != prolonged_action(chi, L):
            return False
        return self.conservation.reproduces(dbar(self.current).top_coefficient(), eqs)


def equations(L: Lagrangian, eqs: EquationSystem | None = None) -> EquationSystem:
    return eqs if eqs is not None else EquationSystem.from_lagrangian(L)


def noether_current(chi, L: Lagrangian, eqs: EquationSystem | None = None, bound=None) -> NoetherCharge:
    chi = _field(chi)
    eqs = equations(L, eqs)
    sigma = check_noether_symmetry(chi, L)
    theta = legendre_form(L).form
    j = sigma + contract(chi, theta)
    flux = dbar(j).top_coefficient()
    _, cert = is_zero_on_shell(flux, eqs, bound)
    charge = NoetherCharge(L, chi, sigma, j, cert)
    if not charge.verify(eqs):
        raise RuntimeError("internal error: Noether charge invariants do not hold")
    return charge


def first_noether_form(charge: NoetherCharge, sign: int = NOETHER_SIGN) -> BigradedForm:
    """``dvert j + sign * i_chi omega``."""
    omega = presymplectic_current(charge.lagrangian).form
    return dvert(charge.current) + contract(charge.symmetry, omega).scale(Expr.const(sign))


def check_first_noether_symplectic(
    charge: NoetherCharge, L: Lagrangian | None = None, eqs=None, bound=None, sign: int = NOETHER_SIGN
) -> Verdict:
    L = L or charge.lagrangian
    eqs = equations(L, eqs)
    F = first_noether_form(charge, sign)
    try:
        _, cert = is_dbar_exact_on_shell(F, eqs, bound)
    except Inconclusive as exc:
        return Verdict("first-noether", INCONCLUSIVE, F, detail=str(exc))
    return Verdict("first-noether", PASS, certificate=cert)


# ----------------------------------------------------------------------------
# gauge sector


@dataclass
class GaugeOperator:
    """``op`` maps the gauge parameters (auxiliary fields appended to the
    bundle) to the field directions."""

    op: LinDiffOp
    bundle: Bundle
    params: tuple = ("eps",)

    def __post_init__(self):
        self.params = tuple(self.params)
        if self.op.cols != len(self.params):
            raise ValueError("operator columns must match the gauge parameters")
        if self.op.rows != self.bundle.m:
            raise ValueError("operator rows must match the bundle's fields")

    @property
    def extended(self) -> Bundle:
        return self.bundle.extended(self.params)

    def parameter_fields(self) -> tuple:
        ext = self.extended
        return tuple(ext.field(p) for p in self.params)

    def direction(self, eps: Sequence | None = None) -> EvolField:
        """``chi = G(eps)``; generic auxiliary fields when ``eps`` is omitted."""
        if eps is None:
            eps = self.parameter_fields()
        return EvolField(apply(self.op, [Expr.coerce(e) for e in eps]))


def check_noether_gauge_symmetry(G: GaugeOperator, L: Lagrangian) -> Verdict:
    chi = G.direction()
    try:
        sigma = check_noether_symmetry(chi, L.on(G.extended))
    except NotSymmetry as exc:
        return Verdict("gauge-symmetry", FAIL, exc.witness, detail="Euler-Lagrange derivatives of the variation")
    return Verdict("gauge-symmetry", PASS, sigma)


def noether_identity(G: GaugeOperator, L: Lagrangian):
    """``G^+(E(L))`` and whether it vanishes identically."""
    values = apply(adjoint(G.op), euler_lagrange(L))
    ok = all(not v.terms for v in values)
    return values, Verdict("noether-identity", PASS if ok else FAIL, None if ok else values)


def _operator_on_shell(op: LinDiffOp, eqs: EquationSystem, bound) -> tuple[str, object, list]:
    """Check every coefficient of ``op`` on shell: identically zero first."""
    certs = []
    for A, row in enumerate(op.entries):
        for a, entry in enumerate(row):
            for I, c in entry.items():
                refuted = eqs.refutes(c)
                if refuted is not None:
                    return FAIL, (A, a, I, refuted), certs
                try:
                    _, cert = is_zero_on_shell(c, eqs, bound)
                except Inconclusive:
                    return INCONCLUSIVE, (A, a, I, c), certs
                certs.append(((A, a, I), cert))
    return PASS, None, certs


def check_infinitesimal_gauge(G: GaugeOperator, L: Lagrangian, eqs=None, bound=None) -> Verdict:
    """``l_E o G = 0`` and ``G^+ o l_E = 0`` on shell."""
    eqs = equations(L, eqs)
    ell = linearize(euler_lagrange(L), L.n, L.m)
    forward = compose(ell, G.op)
    backward = compose(adjoint(G.op), ell)
    if forward.is_zero() and backward.is_zero():
        return Verdict("infinitesimal-gauge", PASS, detail="both compositions vanish identically")
    for label, op in (("l_E o G", forward), ("G+ o l_E", backward)):
        status, where, _ = _operator_on_shell(op, eqs, bound)
        if status != PASS:
            return Verdict("infinitesimal-gauge", status, op, detail=f"{label} at entry {where[:3]}")
    return Verdict("infinitesimal-gauge", PASS, detail="compositions vanish on shell")


def verify_kernel_direction(chi, L: Lagrangian, eqs=None, bound=None) -> Verdict:
    """``i_chi omega`` is ``dbar``-exact modulo the equation ideal."""
    chi = _field(chi)
    eqs = equations(L, eqs)
    omega = presymplectic_current(L).form
    F = contract(chi, omega)
    try:
        _, cert = is_dbar_exact_on_shell(F, eqs, bound)
    except Inconclusive as exc:
        if F.q == 0:
            refuted = eqs.refutes_form(F)
            if refuted is not None:
                return Verdict("kernel-direction", FAIL, refuted, detail="i_chi omega does not vanish on shell")
        return Verdict("kernel-direction", INCONCLUSIVE, F, detail=str(exc))
    return Verdict("kernel-direction", PASS, certificate=cert)


def bracket(c1: NoetherCharge, c2: NoetherCharge, L: Lagrangian | None = None) -> BigradedForm:
    """``-i_{chi1} i_{chi2} omega``, a (0, n-1)-form."""
    L = L or c1.lagrangian
    omega = presymplectic_current(L).form
    return -contract(c1.symmetry, contract(c2.symmetry, omega))
