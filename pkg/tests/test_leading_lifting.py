from fractions import Fraction

import numpy as np
import pytest

from app.core.critsolve.leading import LeadingSystem, solve_leading
from app.core.critsolve.lifting import (
    critical_value,
    hessian_leading,
    lift,
    normalized_residual,
)
from app.core.errors import DegenerateConfiguration
from app.core.laurent import LaurentSeries

VERTEX = (Fraction(1, 3), Fraction(1, 3))


def p2_series(extra=(), trunc=4) -> LaurentSeries:
    return LaurentSeries.from_monomials(
        [((1, 0), 0, 1), ((0, 1), 0, 1), ((-1, -1), 1, 1), *extra], trunc
    )


# =========================
# Leading system
# =========================
def test_p2_leading_roots_are_cube_roots_of_unity():
    system = LeadingSystem.from_series(p2_series(), VERTEX)
    assert system.delta == Fraction(1, 3)
    assert system.monomials == [(-1, -1), (0, 1), (1, 0)]

    roots = solve_leading(system)
    assert len(roots) == 3
    for root in roots:
        u1, u2 = root.units
        assert root.multiplicity == 1
        assert abs(u1 - u2) < 1e-9
        assert abs(u1 ** 3 - 1) < 1e-9
        g1, g2 = system.log_gradient(u1, u2)
        assert abs(g1) < 1e-9 and abs(g2) < 1e-9


def test_single_monomial_has_no_roots():
    W = p2_series()
    system = LeadingSystem.from_series(W, (Fraction(-1), Fraction(1)))
    assert system.monomials == [(1, 0)]
    assert solve_leading(system) == []


def test_vanishing_log_partial_is_degenerate():
    # z1 + 1/z1 does not depend on z2: its critical locus is a curve
    W = LaurentSeries.from_monomials([((1, 0), 0, 1), ((-1, 0), 0, 1)], 4)
    with pytest.raises(DegenerateConfiguration):
        solve_leading(LeadingSystem.from_series(W, (0, 0)))


# =========================
# Lifting
# =========================
def test_exact_leading_root_needs_no_correction():
    W = p2_series()
    system = LeadingSystem.from_series(W, VERTEX)
    root = solve_leading(system)[0]
    result = lift(root.units, W, VERTEX, system)
    assert result.steps == 0
    assert normalized_residual(W, VERTEX, result.units) >= W.trunc_order


def test_lift_corrects_higher_order_terms():
    W = p2_series(extra=[((1, 1), 1, 1)])
    system = LeadingSystem.from_series(W, VERTEX)
    roots = solve_leading(system)
    assert len(roots) == 3
    for root in roots:
        result = lift(root.units, W, VERTEX, system)
        assert result.steps >= 1
        assert normalized_residual(W, VERTEX, result.units) >= W.trunc_order
        z1, z2 = result.coords()
        assert z1.valuation == Fraction(1, 3)
        assert z2.valuation == Fraction(1, 3)
        # the leading coefficient of each unit is still the leading root
        assert abs(result.units[0].leading_coefficient - root.units[0]) < 1e-9


def test_hessian_of_quadric():
    W = LaurentSeries.from_monomials([((2, 0), 0, 1), ((0, 2), 0, 1)], 4)
    H = hessian_leading(W, (0, 0), (1, 1))
    assert np.allclose(np.array(H.matrix), [[2, 0], [0, 2]])
    assert H.morse
    assert H.det_valuation == 0


def test_p2_points_are_morse_with_distinct_values():
    W = p2_series()
    system = LeadingSystem.from_series(W, VERTEX)
    values = []
    for root in solve_leading(system):
        result = lift(root.units, W, VERTEX, system)
        assert hessian_leading(W, VERTEX, result.units).morse
        value = critical_value(W, VERTEX, result.units)
        assert value.valuation == Fraction(1, 3)
        # W = 3 T^(1/3) u at the point u1 = u2 = u
        assert abs(value.leading_coefficient - 3 * root.units[0]) < 1e-9
        values.append(value.leading_coefficient)
    assert min(abs(a - b) for i, a in enumerate(values) for b in values[i + 1 :]) > 1e-3
