"""Undetermined-coefficient fitting over the rationals.

An identity that is affine in a set of named unknown constants is split into
one linear equation per monomial in the remaining indeterminates, then solved
by exact elimination.  On top of that sit the two fitting problems of the
package: flows of a given order as symmetries of a seed, and recursion-operator
coefficients from ``R(flow_m) = lan * flow_{m+step}``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .grading import level_monomials
from .jetcalc import (
    Family, JetContext, P_NAME, PseudoDiffOperator, antiderivative, apply_operator, commutator_of,
    total_derivatives, variational_derivative,
)
from .linalg import rref
from .parsing import parse
from .ring import (
    DEFAULT_MAX_ORDER, A, AB, Const, DiffPoly, Jet, key_exponents, substitute_constants,
)

log = logging.getLogger(__name__)


class NonlinearInUnknowns(ValueError):
    pass


class Inconsistent(ValueError):
    """A fitting problem has no solution within its ansatz."""


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSystem:
    """``rows[i] . x = rhs[i]``; ``labels[i]`` is ``(identity index, monomial)`` of the equation."""

    unknowns: tuple
    rows: tuple
    rhs: tuple
    labels: tuple = ()

    @property
    def equations(self) -> list:
        """Each equation as the affine polynomial ``row . x - rhs``."""
        out = []
        for row, r in zip(self.rows, self.rhs):
            e = DiffPoly.constant(-r)
            for j, c in row.items():
                e = e + DiffPoly.symbol(Const(self.unknowns[j])).scale(c)
            out.append(e)
        return out

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class Unique:
    assignment: dict


@dataclass(frozen=True)
class Parametric:
    particular: dict
    basis: list  # list of dicts name -> Fraction spanning the homogeneous solutions
    free: list


@dataclass(frozen=True)
class InconsistentResult:
    rank: int


def match_to_system(identity: DiffPoly | Iterable[DiffPoly], unknowns: Sequence[str]) -> LinearSystem:
    """One equation per monomial in the non-unknown indeterminates of ``identity = 0``.

    A list of identities is matched identity by identity; equal monomials in
    different identities give separate equations.
    """
    idents = [identity] if isinstance(identity, DiffPoly) else list(identity)
    names = tuple(unknowns)
    col = {n: i for i, n in enumerate(names)}
    eqs: dict = {}
    for idx, ident in enumerate(idents):
        for (vec, consts), c in ident.data.items():
            j = None
            rest = []
            for name, x in consts:
                if name in col:
                    if x != 1 or j is not None:
                        raise NonlinearInUnknowns(f"term with {dict(consts)} is not affine in the unknowns")
                    j = col[name]
                else:
                    rest.append((name, x))
            row, rhs = eqs.setdefault((idx, vec, tuple(rest)), ({}, [Fraction(0)]))
            if j is None:
                rhs[0] -= c
            else:
                row[j] = row.get(j, 0) + c
    labels, rows, rhs = [], [], []
    for key in sorted(eqs, key=repr):
        row, r = eqs[key]
        row = {j: v for j, v in row.items() if v}
        if not row and not r[0]:
            continue
        labels.append(key)
        rows.append(row)
        rhs.append(r[0])
    return LinearSystem(names, tuple(rows), tuple(rhs), tuple(labels))


def solve(sys: LinearSystem):
    """Exact elimination; returns :class:`Unique`, :class:`Parametric` or :class:`InconsistentResult`."""
    ech = rref(sys.rows, sys.rhs, len(sys.unknowns))
    if ech.inconsistent:
        return InconsistentResult(ech.rank)
    names = sys.unknowns
    part = dict(zip(names, ech.particular()))
    if not ech.free_columns:
        return Unique(part)
    basis = [dict(zip(names, v)) for v in ech.nullspace()]
    return Parametric(part, basis, [names[j] for j in ech.free_columns])


def residual(sys: LinearSystem, assignment: dict) -> list:
    """Values of ``row . x - rhs``; all zero iff ``assignment`` solves the system."""
    x = [Fraction(assignment.get(n, 0)) for n in sys.unknowns]
    return [sum((c * x[j] for j, c in row.items()), Fraction(0)) - r for row, r in zip(sys.rows, sys.rhs)]


def solve_identity(identity, unknowns: Sequence[str], what: str = "system") -> dict:
    """Match, solve, demand a unique solution."""
    sys = match_to_system(identity, unknowns)
    res = solve(sys)
    log.debug("%s: %d equations, %d unknowns -> %s", what, len(sys), len(unknowns), type(res).__name__)
    if isinstance(res, InconsistentResult):
        raise Inconsistent(f"{what}: no solution in the ansatz ({len(sys)} equations)")
    if isinstance(res, Parametric):
        raise Inconsistent(f"{what}: solution not unique, free unknowns {res.free}")
    return res.assignment


# ---------------------------------------------------------------------------
# ansatz building blocks
# ---------------------------------------------------------------------------

def _sym(name: str) -> DiffPoly:
    return DiffPoly.symbol(Const(name))


def weight_coefficients(family: Family, weight: int, n: int, p_widen: int = 0) -> list:
    """Coefficient monomials compatible with both scaling symmetries.

    A monomial with ``n`` jet factors in an object of ``x``-weight ``weight``
    must carry ``a^(weight-n) a_b^n`` (recursion-operator coefficients) or, for
    the KdV family, that times ``(P a^6 / a_b^2)^j``.  ``p_widen`` adds the
    extra powers ``j = 1..p_widen`` with ``a_b`` exponent kept non-negative.
    """
    base = DiffPoly.monomial(1, {A: weight - n, AB: n})
    out = [base]
    if family is Family.KDV:
        for j in range(1, p_widen + 1):
            if n - 2 * j < 0:
                break
            out.append(DiffPoly.monomial(1, {A: weight - n + 6 * j, AB: n - 2 * j, Const(P_NAME): j}))
    return out


def flow_ansatz(family, b: int, m: int, prefix: str = "c") -> tuple:
    """Level-homogeneous order-``m`` flow with leading term ``a^m u_m`` and unknown lower terms.

    A term with ``n`` jet factors carries ``a^(m-n+1) a_b^(n-1)``, for KdV also
    times ``(P a^6 / a_b^2)^j`` for every ``j`` keeping ``a_b`` non-negative.
    Returns ``(expr, unknown names)``.
    """
    fam = Family.parse(family)
    expr = DiffPoly.monomial(1, {A: m, Jet(m): 1})
    names = []
    for i, lm in enumerate(level_monomials(b, m - b), start=1):
        if lm.factors == ((m - b, 1),):
            continue
        n = lm.degree
        shape = lm.to_poly()
        for j in range((n - 1) // 2 + 1 if fam is Family.KDV else 1):
            coef = DiffPoly.monomial(1, {A: m - n + 1 + 6 * j, AB: n - 1 - 2 * j})
            if j:
                coef = coef * DiffPoly.symbol(Const(P_NAME), j)
            name = f"{prefix}{i}" + (f"_{j}" if j else "")
            names.append(name)
            expr = expr + _sym(name) * coef * shape
    return expr, names


@lru_cache(maxsize=None)
def symmetry_flow(family, b: int, m: int, max_order: int = DEFAULT_MAX_ORDER) -> DiffPoly:
    """The order-``m`` flow commuting with the seed, fitted from :func:`flow_ansatz`."""
    from .hierarchy import seed_flow

    fam = Family.parse(family)
    ctx = JetContext(b, fam, max_order)
    seed = seed_flow(fam, b)
    if m == seed.order:
        return seed.rhs
    G, names = flow_ansatz(fam, b, m)
    sol = solve_identity(commutator_of(seed.rhs, G, ctx), names, f"order-{m} symmetry ({fam.value}, b={b})")
    return substitute_constants(G, sol)


# ---------------------------------------------------------------------------
# recursion operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Erratum:
    family: str
    base: int
    item: str
    printed: str
    derived: str

    def to_json(self) -> dict:
        return {"family": self.family, "base": self.base, "item": self.item,
                "printed": self.printed, "derived": self.derived}


@dataclass
class Derivation:
    operator: object  # hierarchy.RecursionOperator
    errata: list
    scales: dict  # order m -> lan_m
    equations: int
    unknowns: int
    witnesses: dict = field(default_factory=dict)  # label -> residual DiffPoly (zero when consistent)
    system: LinearSystem | None = None
    assignment: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        eqs_ok = self.system is None or not any(residual(self.system, self.assignment))
        return eqs_ok and all(r.is_zero() for r in self.witnesses.values())


def _coefficient_unknowns(fam: Family, b: int, top: int, p_widen: int) -> tuple:
    """Local ansatz ``sum_k c_k D^k``; ``c_top = a^top`` fixed."""
    local = {top: DiffPoly.symbol(A, top)}
    names = []
    for k in range(top - 1, -1, -1):
        level = top - k
        expr = DiffPoly()
        for j, lm in enumerate(level_monomials(b, level), start=1):
            for w, coef in enumerate(weight_coefficients(fam, top, lm.degree, p_widen)):
                name = f"k_{k}_{j}" + (f"_P{w}" if w else "")
                names.append(name)
                expr = expr + _sym(name) * coef * lm.to_poly()
        local[k] = expr
    return local, names


def _matching_orders(fam: Family, b: int) -> list:
    if fam is Family.KDV:
        return [(3, 5), (5, 7)]
    return [(5, 11), (7, 13), (11, 17)]


def _witness_orders(fam: Family, b: int) -> list:
    if fam is Family.KDV:
        return [(7, 9)]
    return []


def derive_recursion_coefficients(family, b: int, max_order: int = DEFAULT_MAX_ORDER,
                                  p_widen: int = 0) -> Derivation:
    """Fit the recursion operator from ``R(flow_m) = lan_m flow_{m+step}``.

    Flows are the seed and its fitted symmetries, so no printed flow is used.
    Nonlocal multipliers ``sigma_i`` range over the matching flow plus the
    printed ``sigma_i`` whenever that is not already a multiple of it; the
    covariants are variational derivatives of ``a^-1`` and, for SKK,
    ``a^-1 a_b^2 u_{b+1}^2``.
    """
    from . import published
    from .hierarchy import STEP, RecursionOperator, printed_operator

    fam = Family.parse(family)
    ctx = JetContext(b, fam, max_order)
    top = STEP[fam]
    flow = lambda m: DiffPoly.jet(1) if m == 1 else symmetry_flow(fam, b, m, max_order)

    local, names = _coefficient_unknowns(fam, b, top, p_widen)

    # nonlocal: (sigma candidates, rho)
    if fam is Family.KDV:
        nl_spec = [([flow(3)], "a^-1")]
        printed_nl = published.KDV_OPERATOR["nonlocal"]
    else:
        nl_spec = [([flow(7)], "a^-1"), ([flow(5)], f"a^-1*ab^2*u{b + 1}^2")]
        printed_nl = published.SKK_OPERATORS[b]["nonlocal"]
    nonlocal_terms = []
    for i, ((cands, rho), (ps, _)) in enumerate(zip(nl_spec, printed_nl), start=1):
        printed_sigma = parse(ps)
        if not _proportional(printed_sigma, cands[0]):
            cands = cands + [printed_sigma]
        sigma = DiffPoly()
        for j, c in enumerate(cands, start=1):
            name = f"s_{i}_{j}"
            names.append(name)
            sigma = sigma + _sym(name) * c
        nonlocal_terms.append((sigma, variational_derivative(parse(rho), ctx)))

    ansatz = PseudoDiffOperator(local, tuple(nonlocal_terms))
    idents = []
    for m, n in _matching_orders(fam, b):
        lan = f"lan_{m}"
        names.append(lan)
        idents.append(_apply_symbolic(ansatz, flow(m), ctx) - _sym(lan) * flow(n))

    sys = match_to_system(idents, names)
    res = solve(sys)
    if isinstance(res, InconsistentResult):
        if fam is Family.KDV and p_widen < 2:
            log.info("KdV ansatz inconsistent; widening with powers of P")
            return derive_recursion_coefficients(fam, b, max_order, p_widen + 1)
        raise Inconsistent(f"recursion ansatz ({fam.value}, b={b}) is inconsistent")
    if isinstance(res, Parametric):
        raise Inconsistent(f"recursion ansatz ({fam.value}, b={b}) leaves {res.free} free")
    sol = res.assignment

    op = PseudoDiffOperator(
        {k: substitute_constants(c, sol) for k, c in local.items() if substitute_constants(c, sol)},
        tuple((substitute_constants(s, sol), g) for s, g in nonlocal_terms),
    )
    R = RecursionOperator(op, fam, b, top, "derived")
    scales = {m: sol[f"lan_{m}"] for m, _ in _matching_orders(fam, b)}

    witnesses = {}
    for m, n in _witness_orders(fam, b):
        r = apply_operator(op, flow(m), ctx)
        lead_key = next(iter(DiffPoly.monomial(1, {A: n, Jet(n): 1}).data))
        witnesses[f"R(u{m}) ~ u{n}"] = r - flow(n).scale(r.data.get(lead_key, 0))

    errata = compare_operators(printed_operator(fam, b), R)
    return Derivation(R, errata, scales, len(sys), len(sys.unknowns), witnesses, sys, sol)


def _proportional(x: DiffPoly, y: DiffPoly) -> bool:
    if x.is_zero() or y.is_zero():
        return x.is_zero() and y.is_zero()
    k = next(iter(y.data))
    c = x.data.get(k)
    return c is not None and x == y.scale(c / y.data[k])


def _apply_symbolic(L: PseudoDiffOperator, e: DiffPoly, ctx: JetContext) -> DiffPoly:
    """``L(e)`` when ``L`` carries unknown constants (they ride along as constants)."""
    out = DiffPoly()
    top = max(L.local)
    de = total_derivatives(e, top, ctx)
    for k, c in L.local.items():
        out = out + c * de[k]
    for sigma, gamma in L.nonlocal_terms:
        out = out + sigma * antiderivative(gamma * e, ctx)
    return out


def compare_operators(printed, derived) -> list:
    """Monomial-level differences between a printed and a derived operator."""
    fam, b = derived.family.value, derived.base
    out = []
    for k in sorted(set(printed.op.local) | set(derived.op.local), reverse=True):
        p = printed.op.local.get(k, DiffPoly())
        d = derived.op.local.get(k, DiffPoly())
        if p != d:
            out.append(Erratum(fam, b, f"R^({k})", str(p), str(d)))
    for i, ((ps, pg), (ds, dg)) in enumerate(zip(printed.op.nonlocal_terms, derived.op.nonlocal_terms), start=1):
        if ps != ds:
            out.append(Erratum(fam, b, f"sigma^({i})", str(ps), str(ds)))
        if pg != dg:
            out.append(Erratum(fam, b, f"gamma^({i})", str(pg), str(dg)))
    return out


def flow_errata(family, b: int, max_order: int = DEFAULT_MAX_ORDER) -> list:
    """Differences between listed flows and their symmetry fits."""
    from .hierarchy import listed_flows

    fam = Family.parse(family)
    out = []
    for m, rec in listed_flows(fam, b).items():
        fitted = symmetry_flow(fam, b, m, max_order) if m >= 5 else None
        if fitted is None:
            continue
        if fitted != rec.rhs:
            diff = rec.rhs - fitted
            out.append(Erratum(fam.value, b, f"u_t,{m}", str(rec.rhs), str(fitted)))
            log.info("listed order-%d flow differs by %s", m, diff)
    return out


def describe_monomial(key: tuple) -> str:
    exps = key_exponents(key)
    return "*".join(f"{s}^{x}" if x != 1 else str(s) for s, x in exps.items()) or "1"
