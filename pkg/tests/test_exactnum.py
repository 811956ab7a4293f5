from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vorefine.exactnum import (
    QuadExt,
    RadicandMismatch,
    determinant,
    format_exact,
    identity,
    mat_apply,
    mat_inverse,
    mat_mul,
    matrix,
    parse_exact,
    quad_sign,
    squarefree_split,
)

fractions = st.fractions(max_denominator=10**6).filter(lambda f: abs(f) < 10**6)


@st.composite
def quads(draw, d=3):
    return QuadExt(draw(fractions), draw(fractions), d)


def test_sign_examples():
    assert quad_sign(QuadExt(1, 0, 3)) == 1
    assert quad_sign(QuadExt(0, 0, 3)) == 0
    assert quad_sign(QuadExt(-2, 1, 3)) == -1
    assert quad_sign(QuadExt(2, -1, 3)) == 1
    assert quad_sign(QuadExt(-7, 4, 3)) == -1  # 49 > 48


def test_arith_examples():
    s = QuadExt.sqrt(3)
    assert (1 + s) * (1 - s) == -2
    assert s * s == 3
    inv = 1 / (1 + s)
    assert inv == QuadExt(Fraction(-1, 2), Fraction(1, 2), 3)
    assert inv * (1 + s) == 1


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QuadExt(1, 1, 3) / QuadExt(0)


def test_radicand_mismatch():
    with pytest.raises(RadicandMismatch):
        QuadExt.sqrt(2) + QuadExt.sqrt(3)
    # rationals mix with any radicand
    assert QuadExt.sqrt(2) + Fraction(1, 2) == QuadExt(Fraction(1, 2), 1, 2)


def test_sqrt_normalises():
    assert QuadExt.sqrt(8) == 2 * QuadExt.sqrt(2)
    assert QuadExt.sqrt(4) == 2
    assert squarefree_split(72) == (6, 2)


def test_bad_radicand():
    with pytest.raises(ValueError):
        QuadExt(0, 1, 4)


@given(quads())
def test_sign_matches_float(x):
    f = float(x)
    if abs(f) > 1e-9:
        assert quad_sign(x) == (1 if f > 0 else -1)
    assert (quad_sign(x) == 0) == (x == 0)


@given(quads(), quads(), quads())
@settings(max_examples=60)
def test_field_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == 0
    if x != 0:
        assert x * x.inverse() == 1
        assert (y / x) * x == y


@given(quads(), quads())
def test_order_is_consistent(x, y):
    assert (x < y) == ((y - x).sign() > 0)
    if x == y:
        assert hash(x) == hash(y)


@given(quads())
def test_text_round_trip(x):
    assert parse_exact(format_exact(x)) == x


@given(fractions)
def test_rational_equality_across_radicands(a):
    assert QuadExt(a, 0, 3) == QuadExt(a)
    assert hash(QuadExt(a, 0, 3)) == hash(QuadExt(a))


def test_parse_variants():
    assert parse_exact("1/2+0*sqrt(3)") == Fraction(1, 2)
    assert parse_exact("1/2*sqrt(3)") == QuadExt(0, Fraction(1, 2), 3)
    assert parse_exact("-1/3-2*sqrt(12)") == QuadExt(Fraction(-1, 3), -4, 3)
    assert format_exact(QuadExt(1, Fraction(-1, 2), 3)) == "1-1/2*sqrt(3)"
    for bad in ["", "1/0x", "sqrt(3)", "1 2", "1+*sqrt(3)"]:
        with pytest.raises(ValueError):
            parse_exact(bad)


def test_matrices():
    m = matrix([[2, 1], [1, 1]])
    assert mat_apply(identity(2), (QuadExt(1), QuadExt(0))) == (1, 0)
    assert mat_mul(m, mat_inverse(m)) == identity(2)
    assert determinant(m) == 1
    with pytest.raises(ValueError):
        mat_apply(m, (QuadExt(1),))
    with pytest.raises(ZeroDivisionError):
        mat_inverse(matrix([[1, 2], [2, 4]]))
