"""Hypothesis strategies for small random differential polynomials."""
from fractions import Fraction

from hypothesis import strategies as st

from jetflows.ring import A, AB, Const, DiffPoly, Jet

small_fraction = st.builds(
    Fraction, st.integers(-6, 6).filter(bool), st.integers(1, 4)
)


def monomials(base: int, top: int = 3, with_consts: bool = False, lower: bool = False):
    """One monomial in ``a``, ``ab`` and ``u_{base+1..base+top}``."""
    first = 0 if lower else base + 1
    jets = st.dictionaries(
        st.integers(first, base + top).map(Jet), st.integers(1, 3), max_size=3
    )
    coeffs = st.fixed_dictionaries({A: st.integers(-4, 6), AB: st.integers(0, 3)})
    consts = (
        st.dictionaries(st.sampled_from([Const("P")]), st.integers(-1, 1), max_size=1)
        if with_consts else st.just({})
    )

    def build(c, j, k, p):
        return DiffPoly.monomial(c, {**j, **k, **p})

    return st.builds(build, small_fraction, jets, coeffs, consts)


def polys(base: int, max_terms: int = 3, **kw):
    def total(ms):
        out = DiffPoly()
        for m in ms:
            out = out + m
        return out

    return st.lists(monomials(base, **kw), min_size=1, max_size=max_terms).map(total)
