"""Sparse Gauss-Jordan elimination over the rationals."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence


@dataclass(frozen=True)
class Echelon:
    """Reduced row echelon form of ``[M | rhs]``.

    ``rows[i]`` is a sparse row whose pivot column is ``pivots[i]`` (with
    coefficient 1); ``rhs[i]`` the matching right-hand side.  ``inconsistent``
    is set when some row reduced to ``0 = c`` with ``c != 0``.
    """

    ncols: int
    rows: tuple
    rhs: tuple
    pivots: tuple
    inconsistent: bool

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def free_columns(self) -> list:
        piv = set(self.pivots)
        return [c for c in range(self.ncols) if c not in piv]

    def particular(self) -> list:
        """Solution with every free variable set to zero."""
        x = [Fraction(0)] * self.ncols
        for p, r in zip(self.pivots, self.rhs):
            x[p] = r
        return x

    def nullspace(self) -> list:
        basis = []
        for f in self.free_columns:
            v = [Fraction(0)] * self.ncols
            v[f] = Fraction(1)
            for p, row in zip(self.pivots, self.rows):
                c = row.get(f)
                if c:
                    v[p] = -c
            basis.append(v)
        return basis


def rref(rows: Sequence[Mapping[int, Fraction]], rhs: Sequence[Fraction], ncols: int) -> Echelon:
    """Eliminate a sparse system ``rows . x = rhs``.

    Columns are processed in index order; among candidate rows the sparsest one
    (then the earliest) is the pivot, so the result is deterministic.
    """
    work = [(dict(r), Fraction(b)) for r, b in zip(rows, rhs)]
    work = [(r, b) for r, b in work if r or b]
    if any(not r and b for r, b in work):
        inconsistent = True
    else:
        inconsistent = False
    work = [(r, b) for r, b in work if r]

    # column -> set of row indices containing it
    by_col: dict = {}
    for i, (r, _) in enumerate(work):
        for c in r:
            by_col.setdefault(c, set()).add(i)

    alive = set(range(len(work)))
    piv_rows = []
    pivots = []
    for col in range(ncols):
        cands = [i for i in by_col.get(col, ()) if i in alive]
        if not cands:
            continue
        p = min(cands, key=lambda i: (len(work[i][0]), i))
        prow, pb = work[p]
        inv = 1 / prow[col]
        prow = {c: v * inv for c, v in prow.items()}
        pb = pb * inv
        work[p] = (prow, pb)
        alive.discard(p)
        # eliminate col from every other row, including earlier pivot rows
        for i in list(by_col.get(col, ())):
            if i == p:
                continue
            r, b = work[i]
            f = r.get(col)
            if not f:
                continue
            for c, v in prow.items():
                nv = r.get(c, 0) - f * v
                if nv:
                    if c not in r:
                        by_col.setdefault(c, set()).add(i)
                    r[c] = nv
                else:
                    r.pop(c, None)
                    by_col.get(c, set()).discard(i)
            b = b - f * pb
            work[i] = (r, b)
            if not r and i in alive:
                alive.discard(i)
                if b:
                    inconsistent = True
        by_col[col] = {p}
        piv_rows.append(p)
        pivots.append(col)
    return Echelon(
        ncols=ncols,
        rows=tuple(work[p][0] for p in piv_rows),
        rhs=tuple(work[p][1] for p in piv_rows),
        pivots=tuple(pivots),
        inconsistent=inconsistent,
    )
