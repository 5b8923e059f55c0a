"""Reports shared by the CLI and the self-test: items, verdict roll-up, JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .jetcalc import BigradedForm, format_form
from .onshell import Certificate
from .symexpr import Bundle, Expr, mi_letters

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}
EXIT_USAGE = 64


@dataclass
class Item:
    name: str
    status: str
    witness: str | None = None
    certificate: list | None = None
    detail: str = ""


@dataclass
class Report:
    command: str
    model: str
    items: list = field(default_factory=list)
    text: str = ""  # primary human-readable output, if any
    ms: int = 0
    brief: bool = False  # human output shows only ``text`` when everything passed

    @property
    def status(self) -> str:
        statuses = {i.status for i in self.items}
        if FAIL in statuses:
            return FAIL
        if INCONCLUSIVE in statuses:
            return INCONCLUSIVE
        return PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def as_dict(self) -> dict:
        items = []
        for i in self.items:
            d = {"name": i.name, "status": i.status}
            if i.witness is not None:
                d["witness"] = i.witness
            if i.certificate is not None:
                d["certificate"] = list(i.certificate)
            items.append(d)
        return {"command": self.command, "model": self.model, "status": self.status, "items": items, "ms": self.ms}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def to_text(self) -> str:
        lines = [self.text] if self.text else []
        if self.brief and self.text and self.status == PASS:
            return self.text
        for i in self.items:
            line = f"[{i.status}] {i.name}"
            if i.detail:
                line += f": {i.detail}"
            lines.append(line)
            if i.witness is not None:
                lines.append(f"    witness: {i.witness}")
            for c in i.certificate or ():
                lines.append(f"    certificate: {c}")
        return "\n".join(lines)


def generator_name(bundle: Bundle | None, a: int, J: tuple) -> str:
    name = f"E{a + 1}"
    if any(J):
        letters = (bundle.independent[i] if bundle else f"x{i + 1}" for i in mi_letters(J))
        name += f"[{','.join(letters)}]"
    return name


def format_certificate(cert: Certificate | None, bundle: Bundle | None = None) -> list | None:
    """One string per certificate piece: ``E1[t]: (multiplier)`` and friends."""
    if cert is None:
        return None
    fmt = bundle.format if bundle is not None else str

    def show(v) -> str:
        if isinstance(v, BigradedForm):
            return format_form(v, bundle)
        return fmt(v) if isinstance(v, Expr) else str(v)

    out = []
    for (a, J), C in sorted(cert.multipliers.items()):
        out.append(f"{generator_name(bundle, a, J)}: {show(C)}")
    for (a, J), C in sorted(cert.contact_multipliers.items()):
        out.append(f"dv {generator_name(bundle, a, J)}: {show(C)}")
    if cert.primitive is not None and not cert.primitive.is_zero():
        out.append(f"primitive: {show(cert.primitive)}")
    return out
