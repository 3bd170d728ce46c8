"""Level grading: integer partitions, level-homogeneous monomials and level splitting.

The level of ``u_{b+j}`` above base ``b`` is ``j``; ``a``, ``a_b``, constants and
jet variables of order ``<= b`` have level 0.  Levels add under multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .ring import DiffPoly, Jet, key_from_exponents


@dataclass(frozen=True)
class Partition:
    """Partition of ``n`` stored as multiplicities: part ``j`` occurs ``mult[j-1]`` times."""

    mult: tuple

    @property
    def n(self) -> int:
        return sum((j + 1) * m for j, m in enumerate(self.mult))

    @property
    def parts(self) -> tuple:
        """Parts in ascending order, e.g. ``(1, 1, 2)`` for ``1+1+2``."""
        out = []
        for j, m in enumerate(self.mult):
            out.extend([j + 1] * m)
        return tuple(out)

    def __str__(self):
        return "+".join(map(str, self.parts))


@dataclass(frozen=True)
class LevelMonomial:
    """``prod_j u_{b+j}^{m_j}``; ``factors`` maps the offset ``j`` to ``m_j``."""

    base: int
    factors: tuple  # sorted ((j, m_j), ...), m_j > 0

    @property
    def level(self) -> int:
        return sum(j * m for j, m in self.factors)

    @property
    def degree(self) -> int:
        """Number of jet factors counted with multiplicity."""
        return sum(m for _, m in self.factors)

    def to_poly(self) -> DiffPoly:
        exps = {Jet(self.base + j): m for j, m in self.factors}
        return DiffPoly.monomial(1, exps)

    @classmethod
    def from_partition(cls, p: Partition, base: int) -> "LevelMonomial":
        return cls(base, tuple((j + 1, m) for j, m in enumerate(p.mult) if m))

    def __str__(self):
        return " ".join(
            f"u{self.base + j}" + (f"^{m}" if m > 1 else "") for j, m in self.factors
        )


def _multiplicity_vectors(n: int, largest: int) -> Iterator[list]:
    # partitions of n into parts <= largest, as multiplicity lists of length `largest`
    if largest == 1:
        yield [n]
        return
    for k in range(n // largest + 1):
        for rest in _multiplicity_vectors(n - k * largest, largest - 1):
            yield rest + [k]


def partitions(n: int) -> list:
    """All partitions of ``n``.

    Order: ascending lexicographic on the reversed multiplicity vector, i.e. by
    the multiplicity of the largest part first, so ``4`` comes out as
    ``1+1+1+1, 1+1+2, 2+2, 1+3, 4``.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"partitions need n >= 1, got {n!r}")
    vecs = list(_multiplicity_vectors(n, n))
    vecs.sort(key=lambda v: v[::-1])
    return [Partition(tuple(v)) for v in vecs]


def partition_matrix(n: int) -> list:
    """Rows of multiplicities, one per partition, in :func:`partitions` order."""
    return [list(p.mult) for p in partitions(n)]


def partition_count(n: int) -> int:
    """p(n) by Euler's pentagonal-number recurrence (independent of the enumerator)."""
    if n < 0:
        return 0
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]


def level_monomials(b: int, n: int) -> list:
    """One monomial of level ``n`` above ``b`` per partition of ``n``."""
    if b < 0:
        raise ValueError("base level must be non-negative")
    return [LevelMonomial.from_partition(p, b) for p in partitions(n)]


def key_level(key: tuple, b: int) -> int:
    vec = key[0]
    # vec = (a, ab, u0, u1, ...): u_k sits at index k + 2
    return sum((k - b) * x for k, x in enumerate(vec[2:]) if k > b)


def level_decompose(e: DiffPoly, b: int) -> dict:
    """Split ``e`` into level-homogeneous parts, ``{level: part}``."""
    buckets: dict = {}
    for key, c in e.data.items():
        buckets.setdefault(key_level(key, b), {})[key] = c
    return {lvl: DiffPoly._wrap(d) for lvl, d in sorted(buckets.items())}


def top_level(e: DiffPoly, b: int) -> DiffPoly:
    parts = level_decompose(e, b)
    return parts[max(parts)] if parts else DiffPoly()


def is_level_homogeneous(e: DiffPoly, b: int, level: int | None = None) -> bool:
    levels = {key_level(k, b) for k in e.data}
    if level is None:
        return len(levels) <= 1
    return levels <= {level}


def monomial_shape(key: tuple, b: int) -> LevelMonomial:
    """The jet part of a monomial above ``b``, as a :class:`LevelMonomial`."""
    vec = key[0]
    return LevelMonomial(b, tuple((k - b, x) for k, x in enumerate(vec[2:]) if k > b and x))


def shape_key(lm: LevelMonomial) -> tuple:
    return key_from_exponents({Jet(lm.base + j): m for j, m in lm.factors})
