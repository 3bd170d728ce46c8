"""Differential structure on the jet ring.

``a`` and ``a_b`` are functions of ``u_b`` alone.  Their second derivative is
eliminated by a family-specific closure rule so the coefficient field stays
finitely generated:

* SKK-type, ``a = (lam*u_b + mu)^(-1/3)``:           ``a_bb = 4 a_b^2 / a``
* KdV-type, ``a = (alpha*u_b^2 + beta*u_b + gamma)^(-1/2)``:
  ``a_bb = 2 a_b^2 / a + (P/4) a^5`` with ``P = beta^2 - 4 alpha gamma``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .linalg import rref
from .ring import (
    AB, A, Coeff, Const, DEFAULT_MAX_ORDER, DiffPoly, Jet, JetOrderOverflow,
    _trim, key_max_jet,
)

P_NAME = "P"


class Family(enum.Enum):
    KDV = "kdv"
    SKK = "skk"

    @classmethod
    def parse(cls, s) -> "Family":
        if isinstance(s, Family):
            return s
        try:
            return cls(str(s).lower())
        except ValueError:
            raise ValueError(f"unknown family {s!r}; expected 'kdv' or 'skk'") from None


class UnsupportedContext(ValueError):
    pass


class NotExact(ValueError):
    """The expression is not a total derivative."""


class NonIntegrableMonomial(ArithmeticError):
    """Integration by parts got stuck although the Euler test passed."""


_SUPPORTED_BASES = {Family.KDV: (3,), Family.SKK: (3, 4, 5)}


@dataclass(frozen=True)
class JetContext:
    base: int
    family: Family = Family.SKK
    max_order: int = DEFAULT_MAX_ORDER
    constants: frozenset = field(default_factory=lambda: frozenset({P_NAME}))
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.strict and self.base not in _SUPPORTED_BASES[self.family]:
            allowed = ", ".join(map(str, _SUPPORTED_BASES[self.family]))
            raise UnsupportedContext(
                f"base level {self.base} is not supported for the {self.family.value} family "
                f"(allowed: {allowed}); base levels b <= 2 are excluded"
            )
        if self.base < 0:
            raise UnsupportedContext("base level must be non-negative")

    def with_base(self, base: int) -> "JetContext":
        return JetContext(base, self.family, self.max_order, self.constants, self.strict)

    @property
    def closure(self) -> DiffPoly:
        return closure_rule(self.family)


def closure_rule(family: Family) -> DiffPoly:
    """``d a_b / d u_b`` expressed in ``a``, ``a_b`` and ``P``."""
    return DiffPoly._wrap(dict(_closure_terms(Family.parse(family))))


@lru_cache(maxsize=None)
def _closure_terms(family: Family) -> tuple:
    # (key, coeff) with key = (vec, consts)
    if family is Family.SKK:
        return (((-1, 2), ()), Fraction(4)),
    return (
        (((-1, 2), ()), Fraction(2)),
        (((5,), ((P_NAME, 1),)), Fraction(1, 4)),
    )


# ---------------------------------------------------------------------------
# partial derivatives on keys
# ---------------------------------------------------------------------------

def _bump(vec: tuple, idx: int, delta: int) -> tuple:
    if idx >= len(vec):
        vec = vec + (0,) * (idx + 1 - len(vec))
    lst = list(vec)
    lst[idx] += delta
    return _trim(tuple(lst))


def _cm(c1: tuple, c2: tuple) -> tuple:
    if not c2:
        return c1
    if not c1:
        return c2
    acc = dict(c1)
    for n, e in c2:
        s = acc.get(n, 0) + e
        if s:
            acc[n] = s
        else:
            del acc[n]
    return tuple(sorted(acc.items()))


def _vadd(v: tuple, w: tuple) -> tuple:
    if len(v) < len(w):
        v, w = w, v
    out = tuple(map(int.__add__, v[: len(w)], w)) + v[len(w):]
    return _trim(out)


@lru_cache(maxsize=1 << 18)
def _partial_base_key(key: tuple, b: int, family: Family) -> tuple:
    """d/du_b of a monomial with coefficient 1, chaining through a and a_b."""
    vec, consts = key
    out = []
    idx = 2 + b
    if idx < len(vec) and vec[idx]:
        out.append(((_bump(vec, idx, -1), consts), Fraction(vec[idx])))
    pa = vec[0] if vec else 0
    if pa:
        out.append(((_bump(_bump(vec, 0, -1), 1, 1), consts), Fraction(pa)))
    pab = vec[1] if len(vec) > 1 else 0
    if pab:
        base_vec = _bump(vec, 1, -1)
        for (gv, gc), gcoef in _closure_terms(family):
            out.append(((_vadd(base_vec, gv), _cm(consts, gc)), pab * gcoef))
    return tuple(out)


def _partial_explicit_key(key: tuple, k: int):
    vec, consts = key
    idx = 2 + k
    if idx < len(vec) and vec[idx]:
        return ((_bump(vec, idx, -1), consts), Fraction(vec[idx]))
    return None


def _accumulate(out: dict, key, c):
    s = out.get(key)
    if s is None:
        out[key] = c
    else:
        s += c
        if s:
            out[key] = s
        else:
            del out[key]


def partial_derivative(e: DiffPoly, v, ctx: JetContext) -> DiffPoly:
    """Formal partial derivative with respect to a jet variable or ``a``/``a_b``.

    ``d/du_b`` includes the dependence of ``a`` and ``a_b`` on ``u_b``.
    """
    out: dict = {}
    if isinstance(v, Jet):
        if v.order == ctx.base:
            for key, c in e.items():
                for k2, c2 in _partial_base_key(key, ctx.base, ctx.family):
                    _accumulate(out, k2, c * c2)
        else:
            for key, c in e.items():
                r = _partial_explicit_key(key, v.order)
                if r is not None:
                    _accumulate(out, r[0], c * r[1])
    elif isinstance(v, Coeff):
        for (vec, consts), c in e.items():
            x = vec[v.depth] if len(vec) > v.depth else 0
            if x:
                _accumulate(out, (_bump(vec, v.depth, -1), consts), c * x)
    elif isinstance(v, Const):
        pass
    else:
        raise TypeError(f"cannot differentiate with respect to {v!r}")
    return DiffPoly._wrap(out)


def dependency_orders(e: DiffPoly, ctx: JetContext) -> list:
    """Jet orders ``i`` with a possibly non-zero ``d e / d u_i``."""
    orders = set()
    for (vec, _), _c in e.items():
        for i in range(2, len(vec)):
            if vec[i]:
                orders.add(i - 2)
        if vec[:2] and any(vec[:2]):
            orders.add(ctx.base)
    return sorted(orders)


# ---------------------------------------------------------------------------
# total derivative
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1 << 20)
def _d_key(key: tuple, b: int, family: Family) -> tuple:
    vec, consts = key
    out: dict = {}
    n = len(vec)
    for idx in range(2, n):
        e = vec[idx]
        if e:
            lst = list(vec)
            lst[idx] -= 1
            if idx + 1 < n:
                lst[idx + 1] += 1
            else:
                lst.append(1)
            _accumulate(out, (_trim(tuple(lst)), consts), Fraction(e))
    if n and (vec[0] or (n > 1 and vec[1])):
        ub1 = 2 + b + 1
        for (pv, pc), c in _partial_base_key(((vec[0], vec[1] if n > 1 else 0), consts), b, family):
            # re-attach the jet part and multiply by u_{b+1}
            jets = vec[2:]
            v = pv + (0,) * (2 - len(pv)) + jets if jets else pv
            v = _bump(v, ub1, 1)
            _accumulate(out, (v, pc), c)
    return tuple(out.items())


def total_derivative(e: DiffPoly, ctx: JetContext) -> DiffPoly:
    """``D e``; raises :class:`JetOrderOverflow` past ``ctx.max_order``."""
    top = e.max_jet()
    if e.has_coeff_syms():
        top = max(top, ctx.base)
    if top + 1 > ctx.max_order:
        raise JetOrderOverflow(f"D would create u{top + 1} beyond max_order={ctx.max_order}")
    out: dict = {}
    b, fam = ctx.base, ctx.family
    get = out.get
    for key, c in e.items():
        for k2, c2 in _d_key(key, b, fam):
            s = get(k2)
            if s is None:
                out[k2] = c * c2
            else:
                s += c * c2
                if s:
                    out[k2] = s
                else:
                    del out[k2]
    return DiffPoly._wrap(out)


def total_derivatives(e: DiffPoly, n: int, ctx: JetContext) -> list:
    """``[e, De, ..., D^n e]``."""
    out = [e]
    for _ in range(n):
        out.append(total_derivative(out[-1], ctx))
    return out


def total_derivative_power(e: DiffPoly, n: int, ctx: JetContext) -> DiffPoly:
    for _ in range(n):
        e = total_derivative(e, ctx)
    return e


def time_derivative(e: DiffPoly, F: DiffPoly, ctx: JetContext, _dF: list | None = None) -> DiffPoly:
    """Derivative of ``e`` along ``u_t = F``: sum of ``de/du_i * D^i F``."""
    orders = dependency_orders(e, ctx)
    if not orders:
        return DiffPoly()
    dF = _dF if _dF is not None and len(_dF) > orders[-1] else total_derivatives(F, orders[-1], ctx)
    out = DiffPoly()
    for i in orders:
        out = out + partial_derivative(e, Jet(i), ctx) * dF[i]
    return out


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoDiffOperator:
    """``sum_k c_k D^k + sum_i sigma_i D^{-1} gamma_i``."""

    local: dict = field(default_factory=dict)
    nonlocal_terms: tuple = ()

    @property
    def order(self) -> int:
        return max((k for k, c in self.local.items() if c), default=-1)

    def __add__(self, other: "PseudoDiffOperator") -> "PseudoDiffOperator":
        loc = dict(self.local)
        for k, c in other.local.items():
            loc[k] = loc.get(k, DiffPoly()) + c
        return PseudoDiffOperator({k: c for k, c in loc.items() if c},
                                  self.nonlocal_terms + other.nonlocal_terms)


def frechet(F: DiffPoly, ctx: JetContext) -> PseudoDiffOperator:
    local = {}
    for i in dependency_orders(F, ctx):
        c = partial_derivative(F, Jet(i), ctx)
        if c:
            local[i] = c
    return PseudoDiffOperator(local)


def apply_operator(L: PseudoDiffOperator, e: DiffPoly, ctx: JetContext) -> DiffPoly:
    """Apply ``L``; the nonlocal part needs every ``gamma_i * e`` to be exact."""
    out = DiffPoly()
    if L.local:
        top = max(L.local)
        de = total_derivatives(e, top, ctx)
        for k, c in L.local.items():
            out = out + c * de[k]
    for sigma, gamma in L.nonlocal_terms:
        out = out + sigma * antiderivative(gamma * e, ctx)
    return out


def adjoint_apply(F: DiffPoly, gamma: DiffPoly, ctx: JetContext) -> DiffPoly:
    """``-F_*^dagger gamma = sum_i (-1)^(i+1) D^i (dF/du_i * gamma)``."""
    orders = dependency_orders(F, ctx)
    if not orders:
        return DiffPoly()
    coeffs = {i: partial_derivative(F, Jet(i), ctx) * gamma for i in orders}
    return -_alternating_sum(coeffs, ctx)


def _alternating_sum(coeffs: dict, ctx: JetContext) -> DiffPoly:
    """``sum_i (-1)^i D^i c_i`` by Horner's scheme."""
    top = max(coeffs)
    acc = coeffs.get(top, DiffPoly())
    for i in range(top - 1, -1, -1):
        acc = coeffs.get(i, DiffPoly()) - total_derivative(acc, ctx)
    return acc


def variational_derivative(rho: DiffPoly, ctx: JetContext) -> DiffPoly:
    """Euler operator ``sum_i (-1)^i D^i (d rho / d u_i)``."""
    orders = dependency_orders(rho, ctx)
    if not orders:
        return DiffPoly()
    coeffs = {i: partial_derivative(rho, Jet(i), ctx) for i in orders}
    return _alternating_sum(coeffs, ctx)


def is_exact(e: DiffPoly, ctx: JetContext) -> bool:
    return variational_derivative(e, ctx).is_zero()


# ---------------------------------------------------------------------------
# integration by parts
# ---------------------------------------------------------------------------

def _top_order(key: tuple, b: int) -> int:
    vec = key[0]
    top = key_max_jet(key)
    if vec[:2] and any(vec[:2]):
        top = max(top, b)
    return top


def _integrate_poly(A_: DiffPoly, k: int) -> DiffPoly:
    """Primitive in the explicit jet variable ``u_k`` (no chain terms)."""
    out = {}
    idx = 2 + k
    for (vec, consts), c in A_.items():
        e = vec[idx] if idx < len(vec) else 0
        out[(_bump(vec, idx, 1), consts)] = c / (e + 1)
    return DiffPoly._wrap(out)


def integrate_base(A_: DiffPoly, ctx: JetContext) -> DiffPoly:
    """A primitive of ``A_`` with respect to ``u_b`` when ``A_`` depends on
    ``u_b`` only through ``a`` and ``a_b`` (factors in other variables ride along).

    Raises :class:`NonIntegrableMonomial` when no primitive exists inside the
    ring (e.g. ``a^{-1} a_b``, whose primitive is ``log a``).
    """
    b = ctx.base
    groups: dict = {}
    kdv = ctx.family is Family.KDV
    for (vec, consts), c in A_.items():
        if 2 + b < len(vec) and vec[2 + b]:
            raise NonIntegrableMonomial("explicit u_b mixed with a, a_b cannot be integrated")
        pa = vec[0] if vec else 0
        pab = vec[1] if len(vec) > 1 else 0
        rest_vec = (0, 0) + tuple(vec[2:]) if len(vec) > 2 else ()
        rest_consts = consts
        pP = 0
        if kdv:
            pP = dict(consts).get(P_NAME, 0)
            rest_consts = tuple((n, x) for n, x in consts if n != P_NAME)
        groups.setdefault((rest_vec, rest_consts), {})[(pa, pab, pP)] = c
    out: dict = {}
    for (rest_vec, rest_consts), poly in groups.items():
        prim = _skk_primitive(poly) if not kdv else _kdv_primitive(poly)
        for (pa, pab, pP), c in prim.items():
            v = _trim((pa, pab) + tuple(rest_vec[2:])) if rest_vec else _trim((pa, pab))
            cs = rest_consts
            if pP:
                cs = tuple(sorted(rest_consts + ((P_NAME, pP),)))
            _accumulate(out, (v, cs), c)
    return DiffPoly._wrap(out)


def _skk_primitive(poly: dict) -> dict:
    # d/du_b (a^p ab^q) = (p + 4q) a^(p-1) ab^(q+1)
    out = {}
    for (p, q, r), c in poly.items():
        denom = p + 4 * q - 3
        if denom == 0:
            raise NonIntegrableMonomial(f"a^{p}*ab^{q} has a logarithmic primitive")
        out[(p + 1, q - 1, r)] = c / denom
    return out


def _kdv_primitive(poly: dict) -> dict:
    # d/du_b (a^p ab^q P^r) = (p+2q) a^(p-1) ab^(q+1) P^r + (q/4) a^(p+5) ab^(q-1) P^(r+1)
    # is homogeneous for g1 = p + 3q (raised by 2) and g2 = q + 2r (raised by 1).
    classes: dict = {}
    for (p, q, r), c in poly.items():
        classes.setdefault((p + 3 * q, q + 2 * r), {})[r] = c
    out = {}
    for (g1, g2), target in classes.items():
        rs = list(range(min(target) - 2, max(target) + 2))
        def mono(r):
            q = g2 - 1 - 2 * r
            return (g1 - 2 - 3 * q, q, r)
        eq_index = {r: i for i, r in enumerate(range(rs[0], rs[-1] + 2))}
        rows = [dict() for _ in eq_index]
        for j, r in enumerate(rs):
            p, q, _ = mono(r)
            if p + 2 * q:
                rows[eq_index[r]][j] = Fraction(p + 2 * q)
            if q:
                rows[eq_index[r + 1]][j] = Fraction(q, 4)
        rhs = [target.get(r, Fraction(0)) for r in eq_index]
        ech = rref(rows, rhs, len(rs))
        if ech.inconsistent:
            raise NonIntegrableMonomial("no primitive in a, a_b, P for this coefficient")
        for j, x in enumerate(ech.particular()):
            if x:
                out[mono(rs[j])] = x
    return out


def antiderivative(e: DiffPoly, ctx: JetContext) -> DiffPoly:
    """``h`` with ``D h = e`` and no constant term.

    Peels the highest jet variable, which must appear linearly, by integrating
    its coefficient in the next lower variable; repeats on the remainder.
    """
    b = ctx.base
    total = DiffPoly()
    rest = e
    try:
        while rest:
            s = max(_top_order(k, b) for k in rest.data)
            if s < 0:
                raise NonIntegrableMonomial("a non-zero constant is not a total derivative")
            if s <= b and rest.has_coeff_syms():
                raise NonIntegrableMonomial(f"term of order {s} in a, a_b has no primitive")
            lin: dict = {}
            idx = 2 + s
            for (vec, consts), c in rest.items():
                x = vec[idx] if idx < len(vec) else 0
                if x > 1:
                    raise NonIntegrableMonomial(f"nonlinear in the top variable u{s}")
                if x == 1:
                    lin[(_bump(vec, idx, -1), consts)] = c
            A_ = DiffPoly._wrap(lin)
            t = s - 1
            if t == b and A_.has_coeff_syms():
                h = _integrate_mixed_base(A_, ctx)
            else:
                h = _integrate_poly(A_, t)
            total = total + h
            rest = rest - total_derivative(h, ctx)
    except NonIntegrableMonomial:
        if not is_exact(e, ctx):
            raise NotExact("expression is not a total derivative") from None
        raise
    return total


def _integrate_mixed_base(A_: DiffPoly, ctx: JetContext) -> DiffPoly:
    with_coeff, plain = {}, {}
    for key, c in A_.items():
        vec = key[0]
        (with_coeff if vec[:2] and any(vec[:2]) else plain)[key] = c
    out = _integrate_poly(DiffPoly._wrap(plain), ctx.base)
    if with_coeff:
        out = out + integrate_base(DiffPoly._wrap(with_coeff), ctx)
    return out


def commutator_of(F: DiffPoly, G: DiffPoly, ctx: JetContext) -> DiffPoly:
    """``F_*[G] - G_*[F]``: zero iff the two flows commute."""
    fo = dependency_orders(F, ctx)
    go = dependency_orders(G, ctx)
    dG = total_derivatives(G, fo[-1] if fo else 0, ctx)
    dF = total_derivatives(F, go[-1] if go else 0, ctx)
    out = DiffPoly()
    for i in fo:
        out = out + partial_derivative(F, Jet(i), ctx) * dG[i]
    for i in go:
        out = out - partial_derivative(G, Jet(i), ctx) * dF[i]
    return out


def seq_sum(items: Sequence[DiffPoly]) -> DiffPoly:
    out = DiffPoly()
    for x in items:
        out = out + x
    return out
