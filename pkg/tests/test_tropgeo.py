from fractions import Fraction

import pytest

from app.core.laurent import LaurentSeries, newton_polytope
from app.core.toricmodel import w_min
from app.core.tropgeo.convenience import (
    is_convenient,
    is_locally_convenient,
    kushnirenko_count,
    offending_interior_cells1,
)
from app.core.tropgeo.curve import (
    EdgeKind,
    edge_weight_matches_dual,
    is_balanced,
    locate,
    total_weight,
    tropicalize,
    vertex_multiplicity,
)
from app.core.tropgeo.lattice import (
    LatticePolygon,
    angle_sort,
    convex_hull,
    intersect_lines,
    lattice_length,
    primitive,
)
from app.core.tropgeo.subdivision import newton_subdivision


def p2_series(a=1) -> LaurentSeries:
    return LaurentSeries.from_monomials(
        [((1, 0), 0, 1), ((0, 1), 0, 1), ((-1, -1), a, 1)], 4
    )


def random_series(rng, size: int) -> LaurentSeries:
    exps = set()
    while len(exps) < size:
        exps.add((rng.randint(-2, 2), rng.randint(-2, 2)))
    return LaurentSeries.from_monomials(
        [(v, Fraction(rng.randint(0, 12), 4), 1) for v in sorted(exps)], 8
    )


# =========================
# Lattice
# =========================
def test_convex_hull_drops_collinear_points():
    hull = convex_hull([(0, 0), (1, 0), (2, 0), (0, 2), (1, 1)])
    assert hull == [(0, 0), (2, 0), (0, 2)]


def test_lattice_helpers():
    assert primitive((4, -6)) == (2, -3)
    assert lattice_length((0, 0), (3, 3)) == 3
    assert intersect_lines((1, 0), 1, (0, 1), Fraction(1, 2)) == (1, Fraction(1, 2))
    assert angle_sort([(0, -1), (-1, 0), (1, 0), (0, 1)]) == [(1, 0), (0, 1), (-1, 0), (0, -1)]
    with pytest.raises(ValueError):
        intersect_lines((1, 1), 0, (2, 2), 1)


def test_polygon_area_and_containment():
    square = LatticePolygon.hull_of([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert square.area2 == 2
    assert square.contains((1, 0))
    assert not square.contains((2, 0))


# =========================
# Subdivision and curve
# =========================
def test_p2_curve_has_one_trivalent_vertex():
    curve = tropicalize(p2_series(a=1))
    assert len(curve.vertices) == 1
    assert curve.vertices[0].coords == (Fraction(1, 3), Fraction(1, 3))
    assert all(e.kind == EdgeKind.RAY for e in curve.edges)
    assert len(curve.edges) == 3
    assert vertex_multiplicity(curve, 0) == 3


def test_minimizers_and_locate():
    curve = tropicalize(p2_series(a=1))
    assert curve.minimizers((Fraction(1, 3), Fraction(1, 3))) == [(-1, -1), (0, 1), (1, 0)]
    assert locate(curve, (Fraction(1, 3), Fraction(1, 3))) == {"kind": "vertex", "id": 0}
    assert locate(curve, (Fraction(-5), Fraction(2)))["kind"] == "chamber"


def test_regular_subdivision_follows_lifts():
    # the interior point (0, 0) is used only when its lift is low enough
    square = [((1, 0), 0, 1), ((0, 1), 0, 1), ((-1, 0), 0, 1), ((0, -1), 0, 1)]
    high = LaurentSeries.from_monomials(square + [((0, 0), 1, 1)], 4)
    low = LaurentSeries.from_monomials(square + [((0, 0), -1, 1)], 4)
    assert (0, 0) in newton_subdivision(high).unused
    assert len(newton_subdivision(low).cells) == 4


def test_fk_is_not_convenient(f1):
    W = w_min(f1)
    S = newton_subdivision(W)
    assert not is_convenient(W) or not is_locally_convenient(S)
    bad = list(offending_interior_cells1(S))
    assert [set(c.endpoints) for c in bad] == [{(0, 1), (0, -1)}]


def test_kushnirenko_count():
    assert kushnirenko_count(p2_series()) == 3
    trinomial = LaurentSeries.from_monomials(
        [((1, 0), 0, 1), ((0, 1), 0, 2), ((-1, -2), 1, 3)], 4
    )
    assert is_convenient(trinomial)
    assert kushnirenko_count(trinomial) == 4


def test_invariants_on_random_series(rng):
    checked = 0
    for _ in range(200):
        W = random_series(rng, rng.randint(3, 6))
        if newton_polytope(W).dimension < 2:
            continue
        curve = tropicalize(W)
        assert is_balanced(curve)
        assert total_weight(curve) == newton_polytope(W).area2
        assert edge_weight_matches_dual(curve)
        assert len(curve.edges) == len(curve.subdivision.cells1)
        checked += 1
    assert checked > 100
