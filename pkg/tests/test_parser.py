from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from curvespine.algebra import BivariatePoly
from curvespine.parser import ParseError, parse_poly, to_text
from curvespine.resolution import ZeroPolynomial, resolve_min


def test_worked_polynomial():
    f = parse_poly("y^3 + x^4 + x^3*y")
    assert f.terms == {(0, 3): 1, (4, 0): 1, (3, 1): 1}


def test_rational_coefficient_and_juxtaposition():
    f = parse_poly("3/2 x y^2 - y")
    assert f.terms == {(1, 2): Fraction(3, 2), (0, 1): -1}


def test_zero_fails_downstream():
    f = parse_poly("0")
    assert f.is_zero()
    with pytest.raises(ZeroPolynomial):
        resolve_min(f)


def test_parentheses_expand():
    assert parse_poly("(y^2+x^3)*(y-x)") == parse_poly(
        "y^3 - x*y^2 + x^3*y - x^4")


@pytest.mark.parametrize("text, offset", [
    ("y^2+", 4), ("y^^2", 2), ("2/0 x", 3), ("y^2+*x", 4), ("x + z", 4),
    ("(x+y", 4),
])
def test_errors_carry_byte_offsets(text, offset):
    with pytest.raises(ParseError) as err:
        parse_poly(text)
    assert err.value.position == offset


def test_offsets_count_bytes():
    with pytest.raises(ParseError) as err:
        parse_poly("x − y +")          # U+2212 is three bytes in utf-8
    assert err.value.position == len("x − y +".encode())


coef = st.fractions(min_value=-20, max_value=20, max_denominator=7).filter(bool)
polys = st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)), coef,
                        max_size=6).map(BivariatePoly)


@given(polys)
def test_roundtrip(f):
    assert parse_poly(to_text(f)) == f
    assert to_text(parse_poly(to_text(f))) == to_text(f)
