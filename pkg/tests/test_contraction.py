import pytest

from app.core.critsolve.contraction import (
    Condition,
    LocalSystem,
    check_preconditions,
    solve_contraction,
)
from app.core.errors import ContractionPreconditionFailed
from app.core.novikov import INF, NovikovScalar

TRUNC = 6


def T(exponent, coeff=1) -> NovikovScalar:
    return NovikovScalar.monomial(exponent, coeff, TRUNC)


def one() -> NovikovScalar:
    return NovikovScalar.constant(1, TRUNC)


def base_system(**overrides) -> LocalSystem:
    fields = dict(
        a=one(),
        b=T(1),
        c=T(1, 2),
        d=one() * 3,
        C1=T(1),
        C2=T(2, -1),
        lam={(2, 0): one(), (1, 1): T(1)},
        eta={(0, 2): one() * 2},
    )
    fields.update(overrides)
    return LocalSystem(**fields)


def test_gap_is_smallest_constant_excess():
    assert check_preconditions(base_system()) == 1


def test_contraction_converges_to_a_solution():
    system = base_system()
    result = solve_contraction(system)
    f1, f2 = system.evaluate(result.w1, result.w2)
    assert f1.valuation == INF or f1.valuation >= TRUNC
    assert f2.valuation == INF or f2.valuation >= TRUNC
    # the solution is as small as the constant terms
    assert result.w1.valuation >= 1
    assert result.w2.valuation >= 2
    assert result.history[0] == (1, 2)
    lows = [min(v) for v in result.history[:-1]]
    assert lows == sorted(lows)


def test_target_stops_early():
    full = solve_contraction(base_system())
    early = solve_contraction(base_system(), target=(3, 3))
    assert early.iterations <= full.iterations
    v1, v2 = early.history[-1]
    assert v1 >= 3 and v2 >= 3


def test_exact_residual_overrides_polynomial_terms():
    # F = (w1 - T, w2 - T^2) solved exactly
    system = base_system(
        b=NovikovScalar.zero(TRUNC),
        c=NovikovScalar.zero(TRUNC),
        d=one(),
        C1=T(1, -1),
        C2=T(2, -1),
        lam={},
        eta={},
        residual=lambda w1, w2: (w1 - T(1), w2 - T(2)),
    )
    result = solve_contraction(system)
    assert result.w1.approx_eq(T(1))
    assert result.w2.approx_eq(T(2))


@pytest.mark.parametrize(
    "overrides, condition",
    [
        (dict(a=one(), b=one(), c=one(), d=one()), Condition.DETERMINANT),
        (dict(b=T(-1)), Condition.DIAGONAL),
        (dict(a=T(1), d=T(1), b=T(1), c=T(1, 2)), Condition.OFF_DIAGONAL),
        (dict(lam={(0, 1): T(-1)}), Condition.MIXED),
        (dict(C1=one()), Condition.CONSTANT),
    ],
)
def test_violated_precondition_is_named(overrides, condition):
    with pytest.raises(ContractionPreconditionFailed) as e:
        solve_contraction(base_system(**overrides))
    assert e.value.condition == condition


def test_component_at_its_goal_does_not_stall_the_other():
    # F2 sits at its goal from the start while F1 keeps gaining one order per step
    system = base_system(
        b=NovikovScalar.zero(TRUNC),
        c=NovikovScalar.zero(TRUNC),
        d=one(),
        C1=T(1),
        C2=T(2),
        lam={(2, 0): one()},
        eta={},
        residual=lambda w1, w2: (w1 + T(1) + w1 * w1, T(2)),
    )
    result = solve_contraction(system, target=(5, 2))
    v1, v2 = result.history[-1]
    assert v1 >= 5
    assert v2 == 2
    assert result.iterations >= 3
