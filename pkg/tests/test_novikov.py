from fractions import Fraction

import pytest

from app.core.errors import ModelError, ParseError, ZeroInverse
from app.core.novikov import (
    INF,
    NovikovScalar,
    RingFlag,
    as_fraction,
    format_fraction,
    tolerance,
    zero_tolerance,
)


def scalar(*pairs, trunc=4) -> NovikovScalar:
    return NovikovScalar.from_terms(pairs, trunc)


def test_as_fraction_accepts_strings_and_floats():
    assert as_fraction("3/10") == Fraction(3, 10)
    assert as_fraction(0.25) == Fraction(1, 4)
    assert as_fraction(2) == 2
    with pytest.raises(ModelError):
        as_fraction("three")


def test_valuation_and_leading_coefficient():
    s = scalar((Fraction(1, 2), 3), (2, 1))
    assert s.valuation == Fraction(1, 2)
    assert s.leading_coefficient == 3
    assert NovikovScalar.zero(4).valuation == INF


def test_terms_at_or_above_truncation_are_dropped():
    s = scalar((1, 1), (4, 5), (7, 1))
    assert s.exponents() == [1]
    assert s.truncated


def test_addition_cancels_below_tolerance():
    a = scalar((1, 1.0), (2, 1.0))
    b = scalar((1, -1.0))
    assert (a + b).valuation == 2


def test_valuation_of_product_is_sum():
    a = scalar((Fraction(1, 3), 2), (1, 1))
    b = scalar((Fraction(1, 2), 1j))
    p = a * b
    assert p.valuation == Fraction(5, 6)
    assert p.leading_coefficient == 2j


def test_ultrametric_inequality():
    a = scalar((1, 1), (2, 3))
    b = scalar((Fraction(3, 2), -2))
    assert (a + b).valuation >= min(a.valuation, b.valuation)


def test_geometric_series_inverse():
    s = scalar((0, 1), (Fraction(1, 2), -1))
    inv = s.invert()
    # (1 - T^(1/2))^-1 = 1 + T^(1/2) + T + ...
    assert inv.exponents() == [Fraction(k, 2) for k in range(8)]
    assert all(abs(c - 1) < 1e-12 for _, c in inv.terms)
    assert (s * inv).approx_eq(NovikovScalar.constant(1, 4))


def test_inverse_shifts_valuation():
    s = scalar((Fraction(1, 3), 2))
    inv = s.invert()
    assert inv.valuation == Fraction(-1, 3)
    assert inv.leading_coefficient == pytest.approx(0.5)


def test_zero_has_no_inverse():
    with pytest.raises(ZeroInverse):
        NovikovScalar.zero(4).invert()
    with pytest.raises(ZeroInverse):
        scalar((1, 1)) / 0


def test_negative_power_uses_inverse():
    s = scalar((1, 2))
    assert (s ** -2).valuation == -2
    assert (s ** -2).leading_coefficient == pytest.approx(0.25)


def test_ring_membership():
    unit = scalar((0, 2), (1, 1))
    positive = scalar((Fraction(1, 5), 1))
    assert unit.ring_membership(RingFlag.LAMBDA_U)
    assert unit.ring_membership(RingFlag.LAMBDA0)
    assert not unit.ring_membership(RingFlag.LAMBDA_PLUS)
    assert positive.ring_membership(RingFlag.LAMBDA_PLUS)
    assert not positive.ring_membership(RingFlag.LAMBDA_U)


def test_text_format_parses_back():
    s = scalar((Fraction(1, 2), 3 + 1j), (2, -1))
    assert NovikovScalar.parse(s.to_text(), 4).approx_eq(s)


def test_parse_reports_column_of_bad_term():
    with pytest.raises(ParseError) as e:
        NovikovScalar.parse("1*T^(1) + oops", 4)
    assert e.value.column == 11


def test_tolerance_context_restores_previous_value():
    before = zero_tolerance()
    with tolerance(1e-12):
        assert zero_tolerance() == 1e-12
    assert zero_tolerance() == before
    with pytest.raises(ModelError):
        with tolerance(1e-2):
            pass


def test_format_fraction():
    assert format_fraction(Fraction(3, 1)) == "3"
    assert format_fraction(Fraction(-1, 4)) == "-1/4"
