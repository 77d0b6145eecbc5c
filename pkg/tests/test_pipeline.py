from collections import Counter
from fractions import Fraction

import pytest

from app.core.critsolve.pipeline import (
    SolveStatus,
    SolverLogger,
    find_all_geometric,
    find_all_geometric_async,
    solve_series,
)
from app.core.errors import GenericityViolation, InadmissiblePerturbation
from app.core.laurent import LaurentSeries
from app.core.toricmodel import local_model

from tests.conftest import fk_model

P2_VERTEX = (Fraction(1, 3), Fraction(1, 3))


def valuations(result) -> Counter:
    return Counter(p.valuation for p in result.geometric)


@pytest.mark.asyncio
async def test_p2_has_three_points(p2_result):
    assert p2_result.status == SolveStatus.COMPLETED
    assert valuations(p2_result) == Counter({P2_VERTEX: 3})
    assert p2_result.count_law.passed
    assert p2_result.count_law.toric == 3
    assert not p2_result.genericity_issues
    assert all(p.morse for p in p2_result.points)


@pytest.mark.asyncio
async def test_sync_and_async_agree(p2_blown_up):
    sync = find_all_geometric(p2_blown_up)
    concurrent = await find_all_geometric_async(p2_blown_up)
    assert valuations(sync) == valuations(concurrent)
    assert [(p.origin, p.index) for p in sync.points] == [(p.origin, p.index) for p in concurrent.points]


def test_toric_blowup_adds_corner_point(p2_blown_up):
    result = find_all_geometric(p2_blown_up)
    assert valuations(result) == Counter({P2_VERTEX: 3, (Fraction(1, 6), Fraction(1, 6)): 1})
    assert result.count_law.found == result.count_law.expected == 4


def test_f1_points_come_from_the_edge(f1):
    result = find_all_geometric(f1)
    assert valuations(result) == Counter({(Fraction(5, 4), Fraction(1, 2)): 4})
    assert {p.origin[0] for p in result.geometric} == {"e"}
    assert result.count_law.passed


@pytest.mark.parametrize("k, a, b", [(0, 3, 1), (1, 3, 1), (2, 4, 1), (3, 5, 1), (1, 5, 2)])
def test_fk_edge_points_sit_at_half_the_width(k, a, b):
    a, b = Fraction(a), Fraction(b)
    result = find_all_geometric(fk_model(k, a, b))
    assert valuations(result) == Counter({(a / 2 - k * b / 4, b / 2): 4})
    assert {p.origin[0] for p in result.geometric} == {"e"}
    assert result.count_law.passed
    values = [p.critical_value for p in result.geometric]
    for i, v in enumerate(values):
        for w in values[i + 1:]:
            assert not v.approx_eq(w, 1e-6)


def test_five_ray_model(five_ray):
    result = find_all_geometric(five_ray)
    expected = Counter(
        {
            P2_VERTEX: 3,
            (Fraction(1, 5), Fraction(3, 5)): 1,
            (Fraction(1, 10), Fraction(7, 10)): 1,
            (Fraction(3, 20), Fraction(3, 20)): 1,
            (Fraction(3, 20), Fraction(1, 12)): 1,
            (Fraction(1, 5), Fraction(1, 30)): 1,
            (Fraction(1, 5), Fraction(31, 40)): 1,
        }
    )
    assert valuations(result) == expected
    assert result.count_law.expected == 9
    assert result.count_law.nontoric == 4


def test_admissible_perturbation_keeps_points(p2):
    perturbation = LaurentSeries.from_monomials([((1, 1), 1, 1)], 3)
    result = find_all_geometric(p2, perturbation)
    assert valuations(result) == Counter({P2_VERTEX: 3})


def test_low_perturbation_is_rejected(p2):
    perturbation = LaurentSeries.from_monomials([((0, 0), 0, 1)], 3)
    with pytest.raises(InadmissiblePerturbation):
        find_all_geometric(p2, perturbation)


def test_solve_series_uses_kushnirenko_count():
    W = LaurentSeries.from_monomials([((1, 0), 0, 1), ((0, 1), 0, 2), ((-1, -2), 1, 3)], 2)
    result = solve_series(W, name="trinomial")
    assert valuations(result) == Counter({(Fraction(1, 4), Fraction(1, 4)): 4})
    assert result.count_law.expected == 4
    assert result.to_dict()["summary"]["count_law"]["passed"] is True


def test_symmetric_square_is_not_generic():
    # (1, -1) and (-1, 1) both have critical value 0
    W = LaurentSeries.from_monomials(
        [((1, 0), 0, 1), ((-1, 0), 0, 1), ((0, 1), 0, 1), ((0, -1), 0, 1)], 3
    )
    result = solve_series(W)
    assert result.count_law.found == 4
    assert [d["kind"] for d in result.genericity_issues] == ["coincident-values"]
    with pytest.raises(GenericityViolation):
        solve_series(W, strict=True)


def test_solver_logger_collects_steps():
    solver_logger = SolverLogger("unit")
    solver_logger.log("vertex", "solved")
    solver_logger.log("edge", "stalled", "warning")
    assert [e["step"] for e in solver_logger.get_logs()] == ["vertex", "edge"]
    summary = solver_logger.get_summary()
    assert summary["total_logs"] == 2
    assert summary["errors"] == 0


def test_nontoric_local_model():
    e1, e2, e3 = Fraction(3, 10), Fraction(1, 5), Fraction(1, 10)
    result = solve_series(local_model([e1, e2, e3]), name="local")
    assert valuations(result) == Counter({(e1, e1): 1, (e1, e2): 1, (e1 + e2 - e3, e3): 1})
    assert sorted(p.critical_value.valuation for p in result.points) == [e3, e2, e1]
    assert result.count_law.passed
