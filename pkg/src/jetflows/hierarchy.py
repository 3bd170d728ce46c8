"""Seed flows, recursion operators, hierarchy generation, commutators and potentiation."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import published
from .grading import is_level_homogeneous
from .jetcalc import (
    Family, JetContext, PseudoDiffOperator, UnsupportedContext, apply_operator,
    commutator_of, total_derivative, variational_derivative,
)
from .parsing import parse
from .ring import DEFAULT_MAX_ORDER, A, DiffPoly, Jet, coefficient_of, degree_in, shift_jet

STEP = {Family.KDV: 2, Family.SKK: 6}


class NotProportional(ValueError):
    """``R(f)`` is not a rational multiple of a normalised level-homogeneous flow."""


@dataclass(frozen=True)
class Provenance:
    kind: str  # "seed", "listed", "generated", "symmetry", "potentiated"
    source: str = ""
    from_order: int | None = None
    scale: Fraction | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "source": self.source}
        if self.from_order is not None:
            out["from_order"] = self.from_order
        if self.scale is not None:
            out["scale"] = str(self.scale)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Provenance":
        scale = d.get("scale")
        return cls(d["kind"], d.get("source", ""), d.get("from_order"),
                   Fraction(scale) if scale is not None else None)


@dataclass(frozen=True)
class FlowRecord:
    order: int
    family: Family
    base: int
    rhs: DiffPoly
    provenance: Provenance = field(default_factory=lambda: Provenance("seed"))

    @property
    def level(self) -> int:
        return self.order - self.base

    def context(self, max_order: int = DEFAULT_MAX_ORDER) -> JetContext:
        return JetContext(self.base, self.family, max_order)


@dataclass(frozen=True)
class RecursionOperator:
    op: PseudoDiffOperator
    family: Family
    base: int
    step: int
    source: str = "derived"


def context(family, b: int, max_order: int = DEFAULT_MAX_ORDER) -> JetContext:
    return JetContext(b, Family.parse(family), max_order)


def _check_supported(family, b: int) -> Family:
    fam = Family.parse(family)
    context(fam, b)  # raises UnsupportedContext
    return fam


def seed_flow(family, b: int) -> FlowRecord:
    fam = _check_supported(family, b)
    order, text, label = published.SEEDS[(fam.value, b)]
    return FlowRecord(order, fam, b, parse(text), Provenance("seed", label))


def listed_flows(family, b: int) -> dict:
    """Flows exactly as listed in the published tables, keyed by order."""
    fam = _check_supported(family, b)
    return {
        m: FlowRecord(m, fam, b, parse(text), Provenance("listed", f"order {m} listing"))
        for m, text in published.FLOWS[(fam.value, b)].items()
    }


def _operator_from_table(fam: Family, b: int, table: dict) -> PseudoDiffOperator:
    ctx = context(fam, b)
    top = STEP[fam]
    local = {top: DiffPoly.symbol(A, top)} if fam is Family.SKK else {}
    local.update({k: parse(t) for k, t in table["local"].items()})
    nonlocal_terms = tuple(
        (parse(s), variational_derivative(parse(rho), ctx)) for s, rho in table["nonlocal"]
    )
    return PseudoDiffOperator(local, nonlocal_terms)


def printed_operator(family, b: int) -> RecursionOperator:
    """The operator exactly as tabulated (transcription readings applied, no corrections)."""
    fam = _check_supported(family, b)
    table = published.KDV_OPERATOR if fam is Family.KDV else published.SKK_OPERATORS[b]
    return RecursionOperator(_operator_from_table(fam, b, table), fam, b, STEP[fam], "printed")


@lru_cache(maxsize=None)
def recursion_operator(family, b: int) -> RecursionOperator:
    """The operator re-derived by coefficient matching; authoritative over the tables."""
    from .solver import derive_recursion_coefficients

    fam = _check_supported(family, b)
    return derive_recursion_coefficients(fam, b).operator


def _normalise(raw: DiffPoly, fam: Family, b: int, m: int) -> tuple:
    """Return ``(raw / c, c)`` where ``c * a^m`` is the ``u_m`` coefficient."""
    if raw.is_zero():
        raise NotProportional(f"R(flow) vanished; expected a multiple of the order-{m} flow")
    if raw.max_jet() != m or degree_in(raw, Jet(m)) != 1:
        raise NotProportional(f"R(flow) is not quasilinear of order {m}")
    lead = coefficient_of(raw, Jet(m), 1)
    target = DiffPoly.symbol(A, m)
    if len(lead) != 1 or next(iter(lead.data)) != next(iter(target.data)):
        raise NotProportional(f"leading coefficient {lead} is not a rational multiple of a^{m}")
    c = next(iter(lead.data.values()))
    out = raw.scale(1 / c)
    if not is_level_homogeneous(out, b, m - b):
        raise NotProportional(f"R(flow) is not level-homogeneous of level {m - b}")
    return out, c


def apply_recursion(R: RecursionOperator, f: FlowRecord, max_order: int = DEFAULT_MAX_ORDER) -> FlowRecord:
    if (R.family, R.base) != (f.family, f.base):
        raise ValueError("operator and flow belong to different (family, base) pairs")
    ctx = f.context(max_order)
    raw = apply_operator(R.op, f.rhs, ctx)
    m = f.order + R.step
    rhs, c = _normalise(raw, f.family, f.base, m)
    return FlowRecord(m, f.family, f.base, rhs,
                      Provenance("generated", f"R[{R.source}]", f.order, c))


def commutator(F: FlowRecord, G: FlowRecord, max_order: int = DEFAULT_MAX_ORDER) -> DiffPoly:
    if (F.family, F.base) != (G.family, G.base):
        raise ValueError("flows belong to different (family, base) pairs")
    return commutator_of(F.rhs, G.rhs, F.context(max_order))


def second_seed(family, b: int) -> FlowRecord | None:
    """SKK chains need the listed order-7 flow as a second starting point."""
    fam = Family.parse(family)
    if fam is not Family.SKK:
        return None
    return listed_flows(fam, b)[7]


def generate_hierarchy(family, b: int, max_order: int, R: RecursionOperator | None = None,
                       jet_limit: int = DEFAULT_MAX_ORDER) -> list:
    """Seed(s) plus repeated recursion, sorted by order, up to ``max_order``."""
    fam = _check_supported(family, b)
    R = R or recursion_operator(fam, b)
    starts = [seed_flow(fam, b)]
    extra = second_seed(fam, b)
    if extra is not None:
        starts.append(extra)
    out = []
    for f in starts:
        while f.order <= max_order:
            out.append(f)
            if f.order + R.step > max_order:
                break
            f = apply_recursion(R, f, jet_limit)
    return sorted(out, key=lambda r: r.order)


def _has_u0(e: DiffPoly) -> bool:
    return any(len(vec) > 2 and vec[2] for vec, _ in e.data)


def potentiate(f: FlowRecord) -> FlowRecord:
    """``v = u_1``: the flow ``D F`` rewritten one base level lower."""
    new_base = f.base - 1
    if new_base < 3:
        raise UnsupportedContext(
            f"potentiating base {f.base} would reach base {new_base}; base levels b <= 2 are excluded"
        )
    if _has_u0(f.rhs):
        raise ValueError("potentiation needs a flow free of u itself")
    ctx = JetContext(f.base, f.family, strict=False)
    rhs = shift_jet(total_derivative(f.rhs, ctx), -1)
    return FlowRecord(f.order, f.family, new_base, rhs,
                      Provenance("potentiated", f"base {f.base}", f.order))
