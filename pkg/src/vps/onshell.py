"""The equation ideal: prolongation, solved-form reduction and bounded
membership / exactness decisions with verified certificates.

Two decision paths exist.  Solved-form rewriting is fast and available for
determined systems; the linear ansatz works for any system but only up to a
declared prolongation bound.  Failure of the ansatz is reported as
:class:`Inconclusive`, never as a negative answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from .jetcalc import BigradedForm, as_form, dbar, dvert, total_derivative_multi, wedge
from .linsolve import Inconsistent, SparseSystem
from .symexpr import BASE, FUNC, JET, ONE, ZERO, Expr, mi_sub

MAX_UNKNOWNS = 20000


class Inconclusive(Exception):
    """The bounded ansatz found no certificate (membership may still hold)."""


class MissingSolvedForm(ValueError):
    pass


def rank(k: tuple) -> tuple:
    """Orderly graded-lex ranking of jet variables: order, then counts, then field."""
    return (k[2], k[3], k[1])


def multi_indices(n: int, max_order: int):
    """All count vectors of order <= max_order, graded then lexicographic."""
    for order in range(max_order + 1):
        found = []
        for combo in combinations_with_replacement(range(n), order):
            counts = [0] * n
            for i in combo:
                counts[i] += 1
            found.append(tuple(counts))
        yield from sorted(found, reverse=True)


# ----------------------------------------------------------------------------
# equation systems


def auto_solved_forms(generators: Sequence[Expr]) -> dict | None:
    """Solve each generator for its leading jet variable when it enters
    linearly with a constant coefficient; ``None`` if that is impossible."""
    out = {}
    for g in generators:
        keys = g.jet_keys()
        if not keys:
            return None
        v = max(keys, key=rank)
        c = g.partial(v).as_constant()
        if not c or v in out:
            return None
        rest = g - Expr.atom(v) * c
        if v in rest.jet_keys():
            return None
        out[v] = rest * (-1 / c)
    return out


class EquationSystem:
    """Generators ``E_a`` of the equation ideal, optionally with solved forms
    ``u^alpha_L -> R`` where ``u^alpha_L - R`` is a constant multiple of a generator."""

    def __init__(self, generators: Sequence, n: int, solved_forms: Mapping | None = None):
        self.generators = tuple(Expr.coerce(g) for g in generators)
        self.n = n
        self.solved_forms = None
        self._meta: dict = {}
        self._var_cache: dict = {}
        self._prolonged: dict = {}
        if solved_forms:
            self.solved_forms = {}
            for lhs, rhs in solved_forms.items():
                key = lhs if isinstance(lhs, tuple) else _single_jet(lhs)
                rhs = Expr.coerce(rhs)
                bad = [k for k in rhs.jet_keys() if rank(k) >= rank(key)]
                if bad:
                    raise ValueError("solved form right-hand side is not of lower rank")
                self.solved_forms[key] = rhs
                self._meta[key] = self._match_generator(Expr.atom(key) - rhs)

    @classmethod
    def from_lagrangian(cls, L, solved="auto") -> "EquationSystem":
        from .varcalc import euler_lagrange

        gens = euler_lagrange(L)
        if solved == "auto":
            solved = auto_solved_forms(gens)
        return cls(gens, L.n, solved)

    def _match_generator(self, rel: Expr):
        for a, g in enumerate(self.generators):
            if not g.terms:
                continue
            m0, c0 = next(iter(g.terms.items()))
            c = rel.terms.get(m0)
            if c is None:
                continue
            ratio = c / c0
            if rel == g * ratio:
                return a, ratio
        raise ValueError("solved form must be a constant multiple of one generator")

    @property
    def min_order(self) -> int:
        return min((g.order() for g in self.generators if g.terms), default=0)

    def prolonged(self, a: int, J: tuple) -> Expr:
        key = (a, J)
        out = self._prolonged.get(key)
        if out is None:
            out = self._prolonged[key] = total_derivative_multi(self.generators[a], J)
        return out

    def prolonged_generators(self, bound: int) -> list:
        """``[((a, J), D_J E_a)]`` for ``|J| <= bound`` (zero generators dropped)."""
        out = []
        for J in multi_indices(self.n, bound):
            for a in range(len(self.generators)):
                g = self.prolonged(a, J)
                if g.terms:
                    out.append(((a, J), g))
        return out

    def default_bound(self, order: int) -> int:
        return max(order - self.min_order + 1, 0)

    # reduction --------------------------------------------------------------
    def _lhs_for(self, k: tuple):
        best = None
        for lhs in self.solved_forms:
            if lhs[1] != k[1]:
                continue
            J = mi_sub(k[3], lhs[3])
            if J is None:
                continue
            if best is None or rank(lhs) < rank(best[0]):
                best = (lhs, J)
        return best

    def _var_normal(self, k: tuple):
        """``(N, cert)`` with ``u_k - N = sum cert[(a, J)] * D_J E_a`` and N reduced."""
        hit = self._var_cache.get(k)
        if hit is not None:
            return hit
        found = self._lhs_for(k)
        if found is None:
            out = (None, None)
        else:
            lhs, J = found
            a, c = self._meta[lhs]
            r = total_derivative_multi(self.solved_forms[lhs], J)
            N, cert = self._reduce(r)
            if cert is not None:
                cert = _cert_add(cert, {(a, J): Expr.const(c)})
            out = (N, cert)
        self._var_cache[k] = out
        return out

    def _reduce(self, e: Expr):
        """Reduce; certificate is ``None`` when a reducible variable sits inside
        a function argument (the rewrite is still performed)."""
        subst = {}
        certs = {}
        trackable = True
        for k in e.atoms():
            if k[0] != JET:
                continue
            N, cert = self._var_normal(k)
            if N is None:
                continue
            subst[k] = N
            certs[k] = cert
            if cert is None:
                trackable = False
        if not subst:
            return e, {}
        for m in e.terms:
            for k, _ in m:
                if k[0] == FUNC and Expr._from_items(k[2]).atoms() & subst.keys():
                    trackable = False
        reduced = e.substitute(subst)
        if not trackable:
            return reduced, None
        cert: dict = {}
        for mono, c in e.terms.items():
            red = [(k, p) for k, p in mono if k in subst]
            if not red:
                continue
            rest = Expr({tuple((k, p) for k, p in mono if k not in subst): c})
            for i, (k, p) in enumerate(red):
                left = ONE
                for k2, p2 in red[:i]:
                    left = left * subst[k2] ** p2
                right = ONE
                for k2, p2 in red[i + 1:]:
                    right = right * Expr.atom(k2, p2)
                v, N = Expr.atom(k), subst[k]
                geo = ZERO
                for j in range(p):
                    geo = geo + v**j * N ** (p - 1 - j)
                factor = rest * left * right * geo
                for key, mult in certs[k].items():
                    cert[key] = cert.get(key, ZERO) + factor * mult
        return reduced, {k: v for k, v in cert.items() if v.terms}

    @property
    def complete(self) -> bool:
        """True when the solved forms are in Kovalevskaya form: one pure
        derivative per generator, all along the same coordinate, with
        right-hand sides free of equal-or-higher derivatives along it.  Then
        the unreduced jet variables are free coordinates on the equation and a
        nonzero reduced polynomial refutes membership."""
        if not self.solved_forms or len(self.solved_forms) != len(self.generators):
            return False
        direction, depth = set(), {}
        for lhs in self.solved_forms:
            nz = [i for i, c in enumerate(lhs[3]) if c]
            if len(nz) != 1 or lhs[1] in depth:
                return False
            direction.add(nz[0])
            depth[lhs[1]] = lhs[3][nz[0]]
        if len(direction) != 1:
            return False
        i = direction.pop()
        for rhs in self.solved_forms.values():
            for k in rhs.jet_keys():
                if k[1] in depth and k[3][i] >= depth[k[1]]:
                    return False
        return True

    def refutes(self, e: Expr):
        """Reduced nonzero form of ``e`` when that proves ``e`` is off the ideal."""
        if not self.complete:
            return None
        r = self._reduce(Expr.coerce(e))[0]
        if not r.terms or any(k[0] == FUNC for k in r.atoms(deep=False)):
            return None
        return r

    def pullback(self, F: BigradedForm) -> BigradedForm:
        """Restrict a form to the equation: reduce coefficients and replace each
        reducible contact factor by the vertical differential of its normal form."""
        return self.pullback_certified(F)[0]

    def pullback_certified(self, F: BigradedForm):
        """``(G, cert)`` with ``G`` the pullback of ``F`` and ``cert`` a certificate
        for ``F - G`` (``None`` when a reduction cannot be tracked).

        For a term ``c X_1 ^ ... ^ X_p ^ h`` write ``c = N(c) + I`` and
        ``X_i = A_i + dvert(Delta_i)`` with ``A_i = dvert N_i``; the difference
        telescopes into ``I X_1..X_p h`` plus the pieces
        ``N(c) A_1..A_{i-1} dvert(Delta_i) X_{i+1}..X_p h``, and
        ``dvert(C g) = g dvert C + dvert(g) C`` splits each of those.
        """
        if not self.solved_forms:
            raise MissingSolvedForm("equation system has no solved forms")
        n = F.n
        out = BigradedForm.zero(n, F.p, F.q)
        mult: dict = {}
        cmult: dict = {}
        trackable = True

        def put(table, key, form):
            table[key] = table[key] + form if key in table else form

        for (contact, horiz), c in F.terms.items():
            Nc, Ic = self._reduce(c)
            if Ic is None:
                trackable = False
                Ic = {}
            factors, pulled, certs = [], [], []
            for k in contact:
                X = BigradedForm(n, 1, 0, {((k,), ()): ONE})
                N, cert = self._var_normal(k)
                factors.append(X)
                if N is None:
                    pulled.append(X)
                    certs.append({})
                else:
                    pulled.append(dvert(BigradedForm.function(n, N)))
                    if cert is None:
                        trackable = False
                        cert = {}
                    certs.append(cert)
            h = BigradedForm.build(n, 0, len(horiz), [(ONE, (), horiz)])
            whole = BigradedForm.function(n, ONE)
            for X in factors:
                whole = wedge(whole, X)
            whole = wedge(whole, h)
            for key, C in Ic.items():
                put(mult, key, whole.scale(C))
            prefix = BigradedForm.function(n, Nc)
            for i in range(len(factors)):
                suffix = BigradedForm.function(n, ONE)
                for X in factors[i + 1:]:
                    suffix = wedge(suffix, X)
                suffix = wedge(suffix, h)
                for key, C in certs[i].items():
                    put(mult, key, wedge(wedge(prefix, dvert(BigradedForm.function(n, C))), suffix))
                    B = wedge(prefix, suffix).scale(C)
                    put(cmult, key, B if i % 2 == 0 else -B)
                prefix = wedge(prefix, pulled[i])
            out = out + wedge(prefix, h)
        if not trackable:
            return out, None
        mult = {k: v for k, v in mult.items() if not v.is_zero()}
        cmult = {k: v for k, v in cmult.items() if not v.is_zero()}
        return out, Certificate("reduce", mult, cmult)

    def refutes_form(self, F: BigradedForm):
        if not self.complete:
            return None
        G = self.pullback(F)
        if G.is_zero() or any(k[0] == FUNC for c in G.terms.values() for k in c.atoms(deep=False)):
            return None
        return G

    def reduce(self, e: Expr) -> Expr:
        if not self.solved_forms:
            raise MissingSolvedForm("equation system has no solved forms")
        return self._reduce(Expr.coerce(e))[0]


def _cert_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, ZERO) + v
    return {k: v for k, v in out.items() if v.terms}


def _single_jet(e: Expr) -> tuple:
    from .symexpr import variable_key

    k = variable_key(e)
    if k[0] != JET:
        raise ValueError("solved-form left-hand side must be a jet variable")
    return k


def prolong(eqs: EquationSystem, l: int) -> list:
    """All ``D_J E_a`` with ``|J| <= l``, canonical, duplicates removed."""
    out, seen = [], set()
    for J in multi_indices(eqs.n, l):
        for a in range(len(eqs.generators)):
            g = eqs.prolonged(a, J)
            if g not in seen:
                seen.add(g)
                out.append(g)
    return out


def reduce(e: Expr, eqs: EquationSystem) -> Expr:
    return eqs.reduce(e)


# ----------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    """``F = dbar(primitive) + sum multipliers[(a,J)] * D_J E_a
    + sum dvert(D_J E_a) ^ contact_multipliers[(a,J)]``."""

    method: str
    multipliers: dict = field(default_factory=dict)
    contact_multipliers: dict = field(default_factory=dict)
    primitive: BigradedForm | None = None

    def ideal_part(self, eqs: EquationSystem, n: int, p: int, q: int) -> BigradedForm:
        out = BigradedForm.zero(n, p, q)
        for (a, J), C in self.multipliers.items():
            out = out + as_form(n, C).scale(eqs.prolonged(a, J))
        for (a, J), B in self.contact_multipliers.items():
            out = out + wedge(dvert(as_form(n, eqs.prolonged(a, J))), B)
        return out

    def reproduces(self, F, eqs: EquationSystem) -> bool:
        F = as_form(eqs.n, F)
        total = self.ideal_part(eqs, F.n, F.p, F.q)
        if self.primitive is not None:
            total = total + dbar(self.primitive)
        return total == F


# ----------------------------------------------------------------------------
# linear ansatz


def _divide(rho: tuple, nu: tuple):
    if not nu:
        return rho
    d = dict(rho)
    for k, e in nu:
        have = d.get(k, 0)
        if have < e:
            return None
        if have == e:
            del d[k]
        else:
            d[k] = have - e
    return tuple(sorted(d.items()))


def _mono_stats(mono: tuple):
    order, jdeg, xdeg = -1, 0, 0
    for k, e in mono:
        if k[0] == JET:
            order = max(order, k[2])
            jdeg += e
        elif k[0] == BASE:
            xdeg += e
        elif k[0] == FUNC:
            order = max(order, Expr._from_items(k[2]).order())
    return order, jdeg, xdeg


def _form_stats(F: BigradedForm):
    order, jdeg, xdeg = -1, 0, 0
    for (contact, _), c in F.terms.items():
        for k in contact:
            order = max(order, k[2])
        for mono in c.terms:
            o, j, x = _mono_stats(mono)
            order, jdeg, xdeg = max(order, o), max(jdeg, j), max(xdeg, x)
    return order, jdeg, xdeg


def _unshift(k: tuple, i: int):
    if k[0] != JET or k[3][i] == 0:
        return None
    counts = list(k[3])
    counts[i] -= 1
    return (JET, k[1], k[2] - 1, tuple(counts))


class _Ansatz:
    def __init__(self, F: BigradedForm, eqs: EquationSystem, bound: int, with_primitive: bool):
        self.F, self.eqs, self.n = F, eqs, F.n
        self.p, self.q = F.p, F.q
        self.gens = eqs.prolonged_generators(bound)
        self.gen_monos = [tuple(g.terms) for _, g in self.gens]
        self.gen_partials = []
        for _, g in self.gens:
            self.gen_partials.append({k: tuple(g.partial(k).terms) for k in g.jet_keys()})
        self.with_primitive = with_primitive and F.q >= 1
        order, jdeg, xdeg = _form_stats(F)
        self.max_order = max(order, 0) + bound
        self.max_jdeg = jdeg
        self.max_xdeg = xdeg + 1
        self.unknowns: list = []
        self.index: dict = {}
        self.rows: dict = {}

    # candidate generation ---------------------------------------------------
    def _ok(self, mono: tuple, contact: tuple = ()) -> bool:
        o, j, x = _mono_stats(mono)
        if o > self.max_order or j > self.max_jdeg or x > self.max_xdeg:
            return False
        return all(k[2] <= self.max_order for k in contact)

    def _candidates(self, basis, rho):
        contact, horiz = basis
        for gi, monos in enumerate(self.gen_monos):
            for nu in monos:
                mu = _divide(rho, nu)
                if mu is not None and self._ok(mu, contact):
                    yield ("fun", gi, basis, mu)
        if self.p >= 1:
            for j, k in enumerate(contact):
                rest = contact[:j] + contact[j + 1:]
                for gi, partials in enumerate(self.gen_partials):
                    for nu in partials.get(k, ()):
                        mu = _divide(rho, nu)
                        if mu is not None and self._ok(mu, rest):
                            yield ("con", gi, (rest, horiz), mu)
        if self.with_primitive:
            for i in horiz:
                h = tuple(x for x in horiz if x != i)
                # derivative of the coefficient
                seen = set()
                for idx, (k, e) in enumerate(rho):
                    low = _unshift(k, i)
                    if low is None:
                        continue
                    d = dict(rho)
                    d[k] -= 1
                    if not d[k]:
                        del d[k]
                    d[low] = d.get(low, 0) + 1
                    mu = tuple(sorted(d.items()))
                    if mu not in seen and self._ok(mu, contact):
                        seen.add(mu)
                        yield ("lam", (contact, h), mu)
                d = dict(rho)
                d[(BASE, i)] = d.get((BASE, i), 0) + 1
                mu = tuple(sorted(d.items()))
                if self._ok(mu, contact):
                    yield ("lam", (contact, h), mu)
                # shifted contact label
                for j, k in enumerate(contact):
                    low = _unshift(k, i)
                    if low is None:
                        continue
                    c2 = contact[:j] + (low,) + contact[j + 1:]
                    if len(set(c2)) == len(c2) and self._ok(rho, c2):
                        yield ("lam", (tuple(sorted(c2)), h), rho)

    # images -------------------------------------------------------------------
    def _unknown_form(self, u) -> BigradedForm:
        kind = u[0]
        basis, mono = u[-2], u[-1]
        contact, horiz = basis
        coeff = Expr({mono: Fraction(1)})
        if kind == "lam":
            return BigradedForm.build(self.n, self.p, self.q - 1, [(coeff, contact, horiz)])
        if kind == "fun":
            return BigradedForm.build(self.n, self.p, self.q, [(coeff, contact, horiz)])
        return BigradedForm.build(self.n, self.p - 1, self.q, [(coeff, contact, horiz)])

    def _image(self, u) -> BigradedForm:
        form = self._unknown_form(u)
        if u[0] == "lam":
            return dbar(form)
        g = self.gens[u[1]][1]
        if u[0] == "fun":
            return form.scale(g)
        return wedge(dvert(as_form(self.n, g)), form)

    def run(self) -> Certificate:
        pending = []
        for basis, c in self.F.terms.items():
            for mono in c.terms:
                pending.append((basis, mono))
        seen_targets = set(pending)
        while pending:
            basis, rho = pending.pop()
            for u in self._candidates(basis, rho):
                if u in self.index:
                    continue
                col = len(self.unknowns)
                if col >= MAX_UNKNOWNS:
                    raise Inconclusive(f"ansatz exceeded {MAX_UNKNOWNS} unknowns")
                self.index[u] = col
                self.unknowns.append(u)
                img = self._image(u)
                for b, coeff in img.terms.items():
                    for mono, v in coeff.terms.items():
                        key = (b, mono)
                        self.rows.setdefault(key, {})[col] = v
                        if key not in seen_targets:
                            seen_targets.add(key)
                            pending.append(key)
        system = SparseSystem()
        try:
            for key, row in self.rows.items():
                b, mono = key
                rhs = self.F.terms.get(b, ZERO).terms.get(mono, 0)
                system.add(row, rhs)
            # target terms nothing can produce
            for b, c in self.F.terms.items():
                for mono, v in c.terms.items():
                    if (b, mono) not in self.rows:
                        raise Inconsistent("unreachable target")
        except Inconsistent:
            raise Inconclusive("no certificate within the ansatz bounds") from None
        x = system.solution()
        return self._certificate(x)

    def _certificate(self, x: dict) -> Certificate:
        n = self.n
        prim = BigradedForm.zero(n, self.p, self.q - 1) if self.with_primitive else None
        mult: dict = {}
        cmult: dict = {}
        for col, val in x.items():
            u = self.unknowns[col]
            form = self._unknown_form(u).scale(Expr.const(val))
            if u[0] == "lam":
                prim = prim + form
            elif u[0] == "fun":
                key = self.gens[u[1]][0]
                mult[key] = mult[key] + form if key in mult else form
            else:
                key = self.gens[u[1]][0]
                cmult[key] = cmult[key] + form if key in cmult else form
        mult = {k: v for k, v in mult.items() if not v.is_zero()}
        cmult = {k: v for k, v in cmult.items() if not v.is_zero()}
        return Certificate("ansatz", mult, cmult, prim)


# ----------------------------------------------------------------------------
# decisions


def is_zero_on_shell(e, eqs: EquationSystem, bound: int | None = None, method: str = "auto"):
    """``(True, certificate)`` if ``e = sum C^{aJ} D_J E_a`` with ``|J| <= bound``;
    raises :class:`Inconclusive` otherwise.

    ``method`` is ``"auto"`` (solved forms first, then ansatz), ``"reduce"`` or
    ``"ansatz"``.
    """
    e = Expr.coerce(e)
    if not e.terms:
        return True, Certificate("trivial")
    if bound is None:
        bound = eqs.default_bound(e.order())
    if method in ("auto", "reduce") and eqs.solved_forms:
        reduced, cert = eqs._reduce(e)
        if not reduced.terms and cert is not None:
            certificate = Certificate("reduce", cert)
            if not certificate.reproduces(e, eqs):
                raise RuntimeError("internal error: reduction certificate does not verify")
            return True, certificate
        if method == "reduce":
            raise Inconclusive("solved-form reduction does not reach zero")
    elif method == "reduce":
        raise MissingSolvedForm("equation system has no solved forms")
    F = BigradedForm.function(eqs.n, e)
    cert = _Ansatz(F, eqs, bound, with_primitive=False).run()
    cert.multipliers = {k: v.as_function() for k, v in cert.multipliers.items()}
    if not cert.reproduces(e, eqs):
        raise RuntimeError("internal error: ansatz certificate does not verify")
    return True, cert


def _merge(first: Certificate, second: Certificate, method: str) -> Certificate:
    mult, cmult = dict(first.multipliers), dict(first.contact_multipliers)
    for table, extra in ((mult, second.multipliers), (cmult, second.contact_multipliers)):
        for k, v in extra.items():
            table[k] = table[k] + v if k in table else v
    prim = first.primitive
    if second.primitive is not None:
        prim = second.primitive if prim is None else prim + second.primitive
    return Certificate(
        method,
        {k: v for k, v in mult.items() if not v.is_zero()},
        {k: v for k, v in cmult.items() if not v.is_zero()},
        prim,
    )


def is_dbar_exact_on_shell(F: BigradedForm, eqs: EquationSystem, bound: int | None = None):
    """``(True, certificate)`` if ``F = dbar(lambda) + (equation-ideal terms)``.

    The ideal is generated by the prolonged equations and, for forms with
    contact factors, by their vertical differentials (the contact relations of
    the equation submanifold).  With solved forms the form is first pulled back
    to the equation and only the remainder goes to the ansatz.  Raises
    :class:`Inconclusive` on ansatz exhaustion.
    """
    if F.is_zero():
        prim = BigradedForm.zero(F.n, F.p, F.q - 1) if F.q >= 1 else None
        return True, Certificate("trivial", primitive=prim)
    if bound is None:
        bound = eqs.default_bound(F.order())
    cert = None
    if eqs.solved_forms:
        G, red = eqs.pullback_certified(F)
        if red is not None:
            if G.is_zero():
                cert = red
            else:
                try:
                    rest = _Ansatz(G, eqs, bound, with_primitive=True).run()
                except Inconclusive:
                    rest = None
                if rest is not None:
                    cert = _merge(red, rest, "reduce+ansatz")
    if cert is None:
        cert = _Ansatz(F, eqs, bound, with_primitive=True).run()
    if not cert.reproduces(F, eqs):
        raise RuntimeError("internal error: certificate does not verify")
    return True, cert
