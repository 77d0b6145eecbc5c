from fractions import Fraction

import pytest

from app.core.errors import EmptySeries, ModelError, NonUnitSubstitution, ParseError
from app.core.laurent import (
    FiberPoint,
    LaurentSeries,
    evaluate,
    leading_part,
    log_partial,
    min_level,
    newton_polytope,
    partial,
    restrict_at,
    series_power,
    substitute,
    wall_cross,
)
from app.core.novikov import NovikovScalar


def p2_series(a=1, trunc=4) -> LaurentSeries:
    return LaurentSeries.from_monomials(
        [((1, 0), 0, 1), ((0, 1), 0, 1), ((-1, -1), a, 1)], trunc
    )


def test_repeated_exponents_are_summed():
    W = LaurentSeries.from_monomials([((1, 0), 0, 1), ((1, 0), 1, 2), ((0, 1), 0, 1)], 4)
    assert W.support == [(0, 1), (1, 0)]
    assert W[(1, 0)].exponents() == [0, 1]
    assert W[(5, 5)].is_zero()


def test_restrict_at_balances_levels():
    W = restrict_at(p2_series(a=1), (Fraction(1, 3), Fraction(1, 3)))
    assert {c.valuation for _, c in W.coeffs} == {Fraction(1, 3)}


def test_evaluate_on_fiber_point():
    z1_plus_z2 = LaurentSeries.from_monomials([((1, 0), 0, 1), ((0, 1), 0, 1)], 4)
    value = evaluate(z1_plus_z2, FiberPoint.from_units((1, 1), (1, 1), 4))
    assert value.approx_eq(NovikovScalar.monomial(1, 2, 4))


def test_fiber_point_needs_units():
    with pytest.raises(ModelError):
        FiberPoint((Fraction(0), Fraction(0)), (NovikovScalar.monomial(1, 1, 4),) * 2)


def test_leading_part_at_tropical_vertex():
    lead, delta = leading_part(p2_series(a=1), (Fraction(1, 3), Fraction(1, 3)))
    assert len(lead) == 3
    assert delta == Fraction(1, 3)
    lead, delta = leading_part(p2_series(a=1), (Fraction(0), Fraction(1)))
    assert lead.support == [(1, 0)]
    assert delta == 0


def test_leading_part_of_zero_series():
    with pytest.raises(EmptySeries):
        leading_part(LaurentSeries.zero(4), (0, 0))


def test_log_partial_and_partial():
    W = p2_series(a=1)
    d1 = log_partial(W, 1)
    assert d1[(1, 0)].leading_coefficient == 1
    assert d1[(-1, -1)].leading_coefficient == -1
    assert (0, 1) not in d1.support
    dz2 = partial(W, 2)
    assert dz2.support == [(-1, -2), (0, 0)]
    with pytest.raises(ValueError):
        log_partial(W, 3)


def test_substitute_linear_replacement():
    eps = Fraction(1, 2)
    z1 = LaurentSeries.from_monomials([((1, 0), 0, 1)], 4)
    replacement = LaurentSeries.from_monomials([((1, 0), 0, 1), ((1, 1), -eps, 1)], 4)
    result = substitute(z1, 1, replacement)
    assert result.support == [(1, 0), (1, 1)]
    assert result[(1, 1)].valuation == -eps


def test_wall_cross_and_inverse_cancel():
    eps = Fraction(1, 2)
    W = LaurentSeries.from_monomials([((1, 0), 0, 1), ((0, 1), 0, 1)], 4)
    crossed = wall_cross(W, eps)
    assert crossed[(1, 1)].valuation == -eps
    back = wall_cross(crossed, eps, inverse=True)
    assert back.approx_eq(W)


def test_negative_power_needs_unique_lead():
    R = LaurentSeries.from_monomials([((1, 0), 0, 1), ((0, 1), 0, 1)], 4)
    with pytest.raises(NonUnitSubstitution):
        series_power(R, -1, (Fraction(0), Fraction(0)))


def test_newton_polytope_and_min_level():
    W = p2_series(a=1)
    assert newton_polytope(W).area2 == 3
    assert min_level(W, (Fraction(1, 3), Fraction(1, 3))) == Fraction(1, 3)


def test_json_round_trip_and_bad_entry():
    W = p2_series(a=Fraction(3, 2))
    assert LaurentSeries.from_json_obj(W.to_json_obj(), 4).approx_eq(W)
    with pytest.raises(ParseError):
        LaurentSeries.from_json_obj([{"exp": [1], "coeff": "1"}], 4)
