import pytest
from hypothesis import given

from jetflows.parsing import ParseError, from_latex, parse, to_latex
from jetflows.ring import A, AB, Const, DiffPoly, Jet

from strategies import polys


def test_symbols():
    assert parse("u") == DiffPoly.jet(0)
    assert parse("u12") == DiffPoly.jet(12)
    assert parse("a") == DiffPoly.symbol(A)
    assert parse("ab") == DiffPoly.symbol(AB)
    assert parse("P") == DiffPoly.symbol(Const("P"))


def test_precedence_and_parentheses():
    assert parse("2 + 3*u4^2") == parse("2 + 3*(u4*u4)")
    assert parse("-(a + ab)*u5") == parse("-a*u5 - ab*u5")
    assert parse("a^(-2)") == parse("a^-2")
    assert parse("3/4*a") == DiffPoly.monomial(3, {A: 1}).scale(__import__("fractions").Fraction(1, 4))


def test_division_by_monomial_only():
    assert parse("u4/(2*a)") == parse("1/2*a^-1*u4")
    with pytest.raises(ParseError):
        parse("u4/(a + ab)")


@pytest.mark.parametrize("bad, pos", [("a^5*u5 +", 8), ("a $ b", 2), ("(a + b", 6), ("u4^x", 3)])
def test_errors_report_position(bad, pos):
    with pytest.raises(ParseError) as info:
        parse(bad)
    assert info.value.pos == pos
    assert "^" in str(info.value)


def test_jet_variables_cannot_be_inverted():
    with pytest.raises(ParseError):
        parse("u4^-1")


def test_latex_uses_numeric_base():
    e = parse("1/2*a^6*ab^-1*u6")
    assert to_latex(e, 5) == r"\frac{1}{2} a^{6} a_{5}^{-1} u_{6}"
    assert from_latex(to_latex(e, 5), 5) == e


def test_latex_rejects_other_base():
    with pytest.raises(ParseError):
        from_latex("a_{4} u_{5}", 5)


@given(polys(4, max_terms=5, with_consts=True))
def test_latex_round_trip(e):
    assert from_latex(to_latex(e, 4), 4) == e
