"""Canonical densities, conservation along a flow, cosymmetries and density ansatze."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .grading import level_monomials
from .jetcalc import (
    Family, JetContext, P_NAME, adjoint_apply, antiderivative, is_exact, partial_derivative,
    time_derivative, variational_derivative,
)
from .ring import A, AB, Const, DiffPoly, Jet, substitute_constants
from .solver import InconsistentResult, Parametric, Unique, match_to_system, solve


class NotAMonomial(ValueError):
    pass


class RootNotExact(ValueError):
    pass


@dataclass(frozen=True)
class Label:
    """``RhoMinus1``, ``Rho1``, ``Rho3`` or ``Generic`` (with its level)."""

    kind: str
    level: int | None = None

    def __post_init__(self):
        if self.kind not in ("RhoMinus1", "Rho1", "Rho3", "Generic"):
            raise ValueError(f"unknown density label {self.kind!r}")
        if self.kind == "Generic" and (self.level is None or self.level < 1):
            raise ValueError("a Generic density needs a level >= 1")

    def __str__(self):
        return f"Generic({self.level})" if self.kind == "Generic" else self.kind


RHO_MINUS1 = Label("RhoMinus1")
RHO1 = Label("Rho1")
RHO3 = Label("Rho3")


def Generic(level: int) -> Label:
    return Label("Generic", level)


@dataclass(frozen=True)
class Density:
    expr: DiffPoly
    label: Label
    unknowns: tuple = ()


@dataclass(frozen=True)
class ConservationResult:
    conserved: bool
    flux: DiffPoly | None
    residual: DiffPoly


@dataclass(frozen=True)
class CosymmetryResult:
    holds: bool
    residual: DiffPoly


def canonical_rho_minus1(F: DiffPoly, m: int, ctx: JetContext) -> DiffPoly:
    """``(dF/du_m)^(-1/m)`` for a monomial separant with exponents divisible by ``m``."""
    sep = partial_derivative(F, Jet(m), ctx)
    if len(sep) != 1:
        raise NotAMonomial(f"separant {sep} is not a single monomial")
    (key, c), = sep.data.items()
    if c != 1:
        raise RootNotExact(f"separant coefficient {c} has no rational {m}-th root handled here")
    vec, consts = key
    if any(x % m for x in vec) or any(x % m for _, x in consts):
        raise RootNotExact(f"separant {sep} is not an exact {m}-th power")
    if any(vec[2:]):
        raise NotAMonomial(f"separant {sep} depends on jet variables above the base")
    return DiffPoly._wrap({(tuple(-x // m for x in vec), tuple((n, -x // m) for n, x in consts)): Fraction(1)})


def check_conserved(rho: DiffPoly, F: DiffPoly, ctx: JetContext) -> ConservationResult:
    rho_t = time_derivative(rho, F, ctx)
    res = variational_derivative(rho_t, ctx)
    if res.is_zero():
        return ConservationResult(True, antiderivative(rho_t, ctx), res)
    return ConservationResult(False, None, res)


def check_cosymmetry(gamma: DiffPoly, F: DiffPoly, ctx: JetContext) -> CosymmetryResult:
    """``gamma_t = -F_*^dagger gamma`` along ``u_t = F``."""
    res = time_derivative(gamma, F, ctx) - adjoint_apply(F, gamma, ctx)
    return CosymmetryResult(res.is_zero(), res)


def rho1_skk(ctx: JetContext) -> DiffPoly:
    """``a^-1 a_b^2 u_{b+1}^2``, the tabulated form of the second canonical density."""
    return DiffPoly.monomial(1, {A: -1, AB: 2, Jet(ctx.base + 1): 2})


def rho1_kdv(ctx: JetContext) -> DiffPoly:
    """``a^5 u_{b+1}^2``: the conserved level-2 density of the KdV family.

    It is the only instance of the level-2 ansatz with rational coefficients
    conserved along the order-5 flow; ``a^-1 a_b^2 u_{b+1}^2`` is not.
    """
    return DiffPoly.monomial(1, {A: 5, Jet(ctx.base + 1): 2})


def rho1(ctx: JetContext) -> DiffPoly:
    return rho1_kdv(ctx) if ctx.family is Family.KDV else rho1_skk(ctx)


def coefficient_span(prefix: str, a_range=(-8, 8), ab_range=(0, 6), p_range=(0, 0)) -> tuple:
    """``sum c * a^p a_b^q P^r`` over the bounded box; returns ``(expr, names)``."""
    expr = DiffPoly()
    names = []
    for r in range(p_range[0], p_range[1] + 1):
        for p in range(a_range[0], a_range[1] + 1):
            for q in range(ab_range[0], ab_range[1] + 1):
                name = f"{prefix}_{p}_{q}".replace("-", "m") + (f"_P{r}" if r else "")
                names.append(name)
                exps = {A: p, AB: q, Const(name): 1}
                if r:
                    exps[Const(P_NAME)] = r
                expr = expr + DiffPoly.monomial(1, exps)
    return expr, names


def density_ansatz(label: Label, ctx: JetContext, prefix: str = "c",
                   a_range=(-8, 8), ab_range=(0, 6), p_range=(0, 0)) -> Density:
    """Ansatz with coefficient functions of ``u_b`` replaced by finite spans in ``a``, ``a_b``."""
    b = ctx.base
    if label.kind == "RhoMinus1":
        return Density(DiffPoly.symbol(A, -1), label)
    if label.kind == "Rho1":
        shapes = [DiffPoly.jet(b + 1, 2)]
    elif label.kind == "Rho3":
        shapes = [DiffPoly.jet(b + 2, 2), DiffPoly.jet(b + 1, 4)]
    else:
        shapes = [lm.to_poly() for lm in level_monomials(b, label.level)]
    expr = DiffPoly()
    names = []
    for i, shape in enumerate(shapes, start=1):
        span, ns = coefficient_span(f"{prefix}{i}", a_range, ab_range, p_range)
        expr = expr + span * shape
        names.extend(ns)
    return Density(expr, label, tuple(names))


def conserved_instances(d: Density, F: DiffPoly, ctx: JetContext) -> list:
    """Basis of the ansatz instances conserved along ``F`` (possibly empty)."""
    rho_t = time_derivative(d.expr, F, ctx)
    sys = match_to_system(variational_derivative(rho_t, ctx), d.unknowns)
    res = solve(sys)
    if isinstance(res, InconsistentResult):  # homogeneous, cannot happen
        return []
    if isinstance(res, Unique):
        return []  # only the zero instance
    assert isinstance(res, Parametric)
    return [substitute_constants(d.expr, vec) for vec in res.basis]


def nontrivial_instances(d: Density, F: DiffPoly, ctx: JetContext) -> list:
    """Conserved instances that are not total derivatives."""
    return [r for r in conserved_instances(d, F, ctx) if not is_exact(r, ctx)]
