"""Sparse Laurent polynomials over jet variables with exact rational coefficients.

Indeterminates come in three kinds:

* jet variables ``u_k`` (``k >= 0``), non-negative exponents only;
* the separant root ``a`` and its base-level derivative ``a_b`` (``ab`` in text);
* named constants such as ``P`` or the unknowns of an ansatz.

A monomial is stored under a hashable key ``(vec, consts)``.  ``vec`` is the
dense tuple ``(exp_a, exp_ab, exp_u0, exp_u1, ...)`` with trailing zeros
stripped and ``consts`` is a sorted tuple of ``(name, exp)`` pairs.  Terms live
in a plain dict from key to :class:`fractions.Fraction`; zero coefficients are
never stored, so two polynomials are equal exactly when their dicts are equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Iterator, Mapping, Union

DEFAULT_MAX_ORDER = 40

Rational = Union[int, Fraction]


class JetOrderOverflow(ValueError):
    """A jet variable exceeds the configured maximal order."""


class JetOrderUnderflow(ValueError):
    """A shift would produce a jet variable of negative order."""


@dataclass(frozen=True, order=True)
class Jet:
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"jet order must be >= 0, got {self.order}")

    def __str__(self):
        return "u" if self.order == 0 else f"u{self.order}"


@dataclass(frozen=True, order=True)
class Coeff:
    """``depth=0`` is ``a``; ``depth=1`` is ``a_b = da/du_b``."""

    depth: int

    def __post_init__(self):
        if self.depth not in (0, 1):
            raise ValueError("only a and a_b are stored; higher derivatives are closed")

    def __str__(self):
        return "a" if self.depth == 0 else "ab"


@dataclass(frozen=True, order=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Indeterminate = Union[Jet, Coeff, Const]

A = Coeff(0)
AB = Coeff(1)


# ---------------------------------------------------------------------------
# key helpers
# ---------------------------------------------------------------------------

def _trim(vec: tuple) -> tuple:
    n = len(vec)
    while n and vec[n - 1] == 0:
        n -= 1
    return vec if n == len(vec) else vec[:n]


def _vadd(v: tuple, w: tuple) -> tuple:
    if len(v) == len(w):
        out = tuple(map(int.__add__, v, w))
        return _trim(out) if out and out[-1] == 0 else out
    if len(v) < len(w):
        v, w = w, v
    out = tuple(map(int.__add__, v[: len(w)], w)) + v[len(w):]
    # the longer vector's tail is untouched, so only short vectors can cancel
    return _trim(out) if out[-1] == 0 else out


def _cmerge(c: tuple, d: tuple) -> tuple:
    if not d:
        return c
    if not c:
        return d
    acc = dict(c)
    for name, e in d:
        s = acc.get(name, 0) + e
        if s:
            acc[name] = s
        else:
            del acc[name]
    return tuple(sorted(acc.items()))


def key_mul(k1: tuple, k2: tuple) -> tuple:
    return (_vadd(k1[0], k2[0]), _cmerge(k1[1], k2[1]))


def key_from_exponents(exps: Mapping[Indeterminate, int]) -> tuple:
    vec = [0, 0]
    consts = {}
    for sym, e in exps.items():
        if e == 0:
            continue
        if isinstance(sym, Jet):
            if e < 0:
                raise ValueError(f"negative exponent on jet variable {sym}")
            idx = 2 + sym.order
            if idx >= len(vec):
                vec.extend([0] * (idx + 1 - len(vec)))
            vec[idx] += e
        elif isinstance(sym, Coeff):
            vec[sym.depth] += e
        elif isinstance(sym, Const):
            consts[sym.name] = consts.get(sym.name, 0) + e
        else:
            raise TypeError(f"not an indeterminate: {sym!r}")
    return (_trim(tuple(vec)), tuple(sorted((n, e) for n, e in consts.items() if e)))


def key_exponents(key: tuple) -> dict:
    vec, consts = key
    out: dict = {}
    for name, e in consts:
        out[Const(name)] = e
    if len(vec) > 0 and vec[0]:
        out[A] = vec[0]
    if len(vec) > 1 and vec[1]:
        out[AB] = vec[1]
    for k, e in enumerate(vec[2:]):
        if e:
            out[Jet(k)] = e
    return out


def key_jets(key: tuple) -> list:
    """``[(k, e), ...]`` for the jet variables of a key, ascending in ``k``."""
    vec = key[0]
    return [(i - 2, e) for i in range(2, len(vec)) if vec[i]]


def key_max_jet(key: tuple) -> int:
    """Highest jet order present, ``-1`` if none."""
    vec = key[0]
    return len(vec) - 3 if len(vec) > 2 else -1


def _sort_key(key: tuple):
    vec, consts = key
    jets = tuple((-(i - 2), -vec[i]) for i in range(len(vec) - 1, 1, -1) if vec[i])
    a = vec[0] if vec else 0
    ab = vec[1] if len(vec) > 1 else 0
    return (jets, consts, -ab, -a)


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    exponents: Mapping[Indeterminate, int] = field(default_factory=dict)

    def __str__(self):
        return _format_term(self.coeff, key_from_exponents(self.exponents), first=True)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, str)):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


class DiffPoly:
    """Immutable normalized sum of monomials."""

    __slots__ = ("_d", "_hash")

    def __init__(self, data: Mapping[tuple, Fraction] | None = None):
        # trusted constructor: callers pass normalized dicts (no zero coefficients)
        self._d = dict(data) if data else {}
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def _wrap(cls, d: dict) -> "DiffPoly":
        p = cls.__new__(cls)
        p._d = d
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Rational) -> "DiffPoly":
        c = _as_fraction(c)
        return cls._wrap({((), ()): c} if c else {})

    @classmethod
    def symbol(cls, sym: Indeterminate, exp: int = 1) -> "DiffPoly":
        return cls._wrap({key_from_exponents({sym: exp}): Fraction(1)})

    @classmethod
    def jet(cls, k: int, exp: int = 1) -> "DiffPoly":
        return cls.symbol(Jet(k), exp)

    @classmethod
    def monomial(cls, coeff: Rational, exps: Mapping[Indeterminate, int]) -> "DiffPoly":
        c = _as_fraction(coeff)
        return cls._wrap({key_from_exponents(exps): c} if c else {})

    # access -----------------------------------------------------------
    @property
    def data(self) -> Mapping[tuple, Fraction]:
        return self._d

    @property
    def terms(self) -> tuple:
        """Canonically ordered monomials."""
        return tuple(Monomial(self._d[k], key_exponents(k)) for k in self.sorted_keys())

    def sorted_keys(self) -> list:
        return sorted(self._d, key=_sort_key)

    def items(self):
        return self._d.items()

    def is_zero(self) -> bool:
        return not self._d

    def __bool__(self):
        return bool(self._d)

    def __len__(self):
        return len(self._d)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.terms)

    def max_jet(self) -> int:
        return max((key_max_jet(k) for k in self._d), default=-1)

    def symbols(self) -> set:
        out = set()
        for k in self._d:
            out.update(key_exponents(k))
        return out

    def constant_names(self) -> set:
        return {n for k in self._d for n, _ in k[1]}

    def has_coeff_syms(self) -> bool:
        return any(len(k[0]) > 0 and (k[0][0] or (len(k[0]) > 1 and k[0][1])) for k in self._d)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return DiffPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other._d) > len(self._d):
            big, small = other._d, self._d
        else:
            big, small = self._d, other._d
        out = dict(big)
        for k, c in small.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s += c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return DiffPoly._wrap(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly._wrap({k: -c for k, c in self._d.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c: Rational) -> "DiffPoly":
        c = _as_fraction(c)
        if not c:
            return DiffPoly()
        return DiffPoly._wrap({k: v * c for k, v in self._d.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if len(self._d) != 1:
                raise ValueError("only monomials can be raised to negative powers")
            return invert_monomial(self) ** (-n)
        result = DiffPoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.constant(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._d == other._d

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __repr__(self):
        return f"DiffPoly({to_text(self)!r})"

    def __str__(self):
        return to_text(self)


def canonicalize(raw: Iterable, max_order: int | None = DEFAULT_MAX_ORDER) -> DiffPoly:
    """Normal form of a raw term sequence.

    ``raw`` yields :class:`Monomial` objects or ``(coeff, {Indeterminate: exp})``
    pairs; repeated exponent maps are combined and zeros dropped.
    """
    out: dict = {}
    for t in raw:
        if isinstance(t, Monomial):
            c, exps = t.coeff, t.exponents
        else:
            c, exps = t
        c = _as_fraction(c)
        key = key_from_exponents(exps)
        if max_order is not None and key_max_jet(key) > max_order:
            raise JetOrderOverflow(f"jet order {key_max_jet(key)} exceeds max_order={max_order}")
        s = out.get(key, 0) + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return DiffPoly._wrap(out)


def multiply(e1: DiffPoly, e2: DiffPoly) -> DiffPoly:
    d1, d2 = e1.data, e2.data
    if len(d1) < len(d2):
        d1, d2 = d2, d1
    out: dict = {}
    get = out.get
    for k2, c2 in d2.items():
        v2, s2 = k2
        for k1, c1 in d1.items():
            v1, s1 = k1
            if len(v1) == len(v2):
                v = tuple(map(int.__add__, v1, v2))
                if v and v[-1] == 0:
                    v = _trim(v)
            else:
                v = _vadd(v1, v2)
            k = (v, _cmerge(s1, s2) if s2 else s1)
            s = get(k)
            if s is None:
                out[k] = c1 * c2
            else:
                s += c1 * c2
                if s:
                    out[k] = s
                else:
                    del out[k]
    return DiffPoly._wrap(out)


def invert_monomial(e: DiffPoly) -> DiffPoly:
    if len(e) != 1:
        raise ValueError("only a single monomial can be inverted")
    (key, c), = e.items()
    vec, consts = key
    if any(vec[2:]):
        raise ValueError("jet variables cannot carry negative exponents")
    inv_vec = _trim(tuple(-x for x in vec[:2]))
    return DiffPoly._wrap({(inv_vec, tuple((n, -x) for n, x in consts)): 1 / c})


def coefficient_of(e: DiffPoly, v: Indeterminate, j: int) -> DiffPoly:
    """Coefficient of ``v**j`` in ``e`` viewed as a polynomial in ``v``."""
    if j < 0 and isinstance(v, Jet):
        raise ValueError("j must be >= 0 for jet variables")
    out = {}
    for key, c in e.items():
        exps = key_exponents(key)
        if exps.get(v, 0) == j:
            exps.pop(v, None)
            out[key_from_exponents(exps)] = c
    return DiffPoly._wrap(out)


def degree_in(e: DiffPoly, v: Indeterminate) -> int:
    return max((key_exponents(k).get(v, 0) for k in e.data), default=0)


def shift_jet(e: DiffPoly, d: int) -> DiffPoly:
    """Relabel ``u_k -> u_{k+d}``.

    ``a`` and ``ab`` are kept symbolically; the caller re-anchors the base level
    (``b -> b + d``) in its context.
    """
    if d == 0:
        return e
    out = {}
    for (vec, consts), c in e.items():
        coeffs, jets = vec[:2], vec[2:]
        if d > 0:
            jets = (0,) * d + jets if jets else jets
        elif jets:
            if any(jets[:-d]):
                low = next(i for i, x in enumerate(jets) if x)
                raise JetOrderUnderflow(f"u{low} shifted by {d} would be negative")
            jets = jets[-d:]
        coeffs = coeffs + (0,) * (2 - len(coeffs)) if jets else coeffs
        out[(_trim(coeffs + jets), consts)] = c
    return DiffPoly._wrap(out)


def substitute_constants(e: DiffPoly, values: Mapping[str, Rational]) -> DiffPoly:
    """Replace named constants by rationals (used to plug solver results back in)."""
    out: dict = {}
    for (vec, consts), c in e.items():
        keep = []
        for name, x in consts:
            if name in values:
                c = c * _as_fraction(values[name]) ** x
            else:
                keep.append((name, x))
        if not c:
            continue
        k = (vec, tuple(keep))
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return DiffPoly._wrap(out)


ZERO = DiffPoly()
ONE = DiffPoly.constant(1)


def a_pow(n: int) -> DiffPoly:
    return DiffPoly.symbol(A, n)


def ab_pow(n: int) -> DiffPoly:
    return DiffPoly.symbol(AB, n)


def u(k: int, n: int = 1) -> DiffPoly:
    return DiffPoly.jet(k, n)


def const(name: str, n: int = 1) -> DiffPoly:
    return DiffPoly.symbol(Const(name), n)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def _factor_strings(key: tuple) -> list:
    vec, consts = key
    parts = []
    for name, e in consts:
        parts.append(name if e == 1 else f"{name}^{e}")
    for i, sym in ((0, "a"), (1, "ab")):
        if len(vec) > i and vec[i]:
            e = vec[i]
            parts.append(sym if e == 1 else f"{sym}^{e}")
    for i in range(len(vec) - 1, 1, -1):
        e = vec[i]
        if e:
            name = "u" if i == 2 else f"u{i - 2}"
            parts.append(name if e == 1 else f"{name}^{e}")
    return parts


def _format_term(c: Fraction, key: tuple, first: bool) -> str:
    parts = _factor_strings(key)
    mag = abs(c)
    if not parts:
        body = str(mag)
    elif mag == 1:
        body = "*".join(parts)
    else:
        body = str(mag) + "*" + "*".join(parts)
    if first:
        return ("-" if c < 0 else "") + body
    return (" - " if c < 0 else " + ") + body


def to_text(e: DiffPoly) -> str:
    """Render in the input grammar; ``parse(to_text(e)) == e``."""
    keys = e.sorted_keys()
    if not keys:
        return "0"
    return "".join(_format_term(e.data[k], k, i == 0) for i, k in enumerate(keys))
