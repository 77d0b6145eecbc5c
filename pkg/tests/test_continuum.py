from fractions import Fraction

import pytest

from app.core.critsolve.continuum import (
    bulk_deformed,
    continuum_model,
    continuum_params,
    continuum_points,
    continuum_scan,
    predicted_points,
)
from app.core.errors import ModelError, OutOfRange
from app.core.report.modelio import load_model
from app.core.toricmodel import cohomology_rank, toric_blowup

from tests.conftest import fk_model


@pytest.fixture(scope="module")
def model():
    # a' = 5/2, b = 1: eps ranges over (0, 1/2)
    return continuum_model(1, 3, 1)


def by_label(points):
    return {p.label: p for p in points}


def test_params_read_back(model):
    p = continuum_params(model)
    assert (p.k, p.a, p.b) == (1, 3, 1)
    assert p.a_eff == Fraction(5, 2)
    assert p.upper == Fraction(1, 2)
    assert cohomology_rank(model) == 5


def test_fixture_matches_constructor(fixtures_dir, model):
    loaded, _ = load_model(fixtures_dir / "fk_continuum.toml")
    assert continuum_params(loaded) == continuum_params(model)


def test_points_at_quarter(model):
    pts = by_label(continuum_points(model, Fraction(1, 4)))
    assert pts["fixed"].branch == 1
    assert pts["fixed"].valuation == (Fraction(5, 4), Fraction(1, 2))
    assert pts["fixed"].local == (Fraction(5, 4), Fraction(3, 4))
    assert pts["bulk"].branch == pts["pair"].branch == -1
    assert pts["bulk"].valuation == (Fraction(3, 4), Fraction(1, 2))
    assert pts["bulk"].local == (Fraction(3, 4), Fraction(1, 4))
    assert pts["pair"].valuation == (Fraction(9, 8), Fraction(1, 2))
    assert pts["pair"].local == (Fraction(9, 8), Fraction(5, 8))
    assert [pts[label].multiplicity for label in ("fixed", "bulk", "pair")] == [2, 1, 2]
    # the count matches the rank of the blown-up F_1
    assert sum(p.multiplicity for p in pts.values()) == 5
    assert all(p.residual > Fraction(3, 2) for p in pts.values())


def test_pair_sits_at_half_the_gap_not_a_quarter(model):
    # (a' - b - eps) / 2, not the degenerate vertex at (a' - b + eps) / 4
    eps = Fraction(1, 10)
    pair = by_label(continuum_points(model, eps))["pair"]
    assert pair.local[1] == (Fraction(5, 2) - 1 - eps) / 2
    assert pair.local[1] != (Fraction(5, 2) - 1 + eps) / 4


@pytest.mark.parametrize(
    "k, a, b, eps",
    [
        (0, 3, 1, Fraction(1, 4)),
        (1, 3, 1, Fraction(1, 10)),
        (1, 3, 1, Fraction(2, 5)),
        (2, 4, 1, Fraction(1, 5)),
        (1, 6, 2, Fraction(1, 3)),
    ],
)
def test_solved_points_match_closed_form(k, a, b, eps):
    m = continuum_model(k, a, b)
    solved = continuum_points(m, eps)
    assert [q.key for q in solved] == [q.key for q in predicted_points(m, eps)]


def test_predicted_points_carry_no_residual(model):
    assert all(q.residual is None for q in predicted_points(model, Fraction(1, 4)))
    assert "residual" not in predicted_points(model, Fraction(1, 4))[0].to_dict()


@pytest.mark.parametrize("eps", [0, Fraction(1, 2), 1, Fraction(-1, 10)])
def test_eps_outside_range(model, eps):
    with pytest.raises(OutOfRange):
        continuum_points(model, eps)
    with pytest.raises(OutOfRange):
        predicted_points(model, eps)


def test_scan_is_linear_with_limits(model):
    trajectory = continuum_scan(model, steps=4)
    assert trajectory.eps_values == tuple(Fraction(i, 10) for i in range(1, 5))
    assert trajectory.is_linear()
    assert trajectory.matches_prediction()
    assert set(trajectory.track("fixed")) == {(Fraction(5, 4), Fraction(1, 2))}
    limits = trajectory.limits()
    assert limits["eps_to_zero"]["bulk"] == (Fraction(1, 2), Fraction(1, 2))
    assert limits["eps_to_zero"]["pair"] == (Fraction(5, 4), Fraction(1, 2))
    assert limits["eps_to_upper"]["bulk"] == limits["eps_to_upper"]["pair"] == (1, Fraction(1, 2))
    data = trajectory.to_dict()
    assert data["range"] == ["0", "1/2"]
    assert len(data["frames"]) == 4
    assert data["matches_prediction"] is True
    assert "residual" in data["frames"][0]["points"][0]


def test_explicit_eps_values_are_sorted(model):
    trajectory = continuum_scan(model, eps_values=["3/10", "1/10", "3/10"])
    assert trajectory.eps_values == (Fraction(1, 10), Fraction(3, 10))


def test_bulk_term_is_added(model):
    W = bulk_deformed(model, Fraction(1, 4))
    assert W[(1, 0)].exponents() == [0, Fraction(1, 4)]


def test_wrong_blowup_size_has_no_continuum():
    m = toric_blowup(fk_model(1, 3, 1), 0, Fraction(1, 4))
    with pytest.raises(ModelError):
        continuum_params(m)


def test_flat_polytope_is_rejected():
    with pytest.raises(ModelError):
        continuum_model(1, 1, 1)
