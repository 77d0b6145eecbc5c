from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from app.core.errors import DegenerateLift, EmptySeries
from app.core.laurent import Exponent, LaurentSeries
from app.core.novikov import INF
from app.core.tropgeo.lattice import (
    LatticePolygon,
    convex_hull,
    cross,
    lattice_length,
    primitive,
    sub,
)

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# SUBDIVISION MODULE
# Purpose: regular Newton subdivision of a series, read off the lower hull of
#          the lifted support points (v, val(a_v)).
# Why: the cells drive everything else. Each 2-cell is dual to a tropical
#      vertex, each 1-cell to a tropical edge.
# -----------------------------------------------------------------------------


Point2 = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Cell:
    """A 2-cell: support points on one lower face of the lifted configuration."""

    id: int
    points: Tuple[Exponent, ...]
    polygon: Tuple[Exponent, ...]
    area2: int
    # where all monomials of the cell tie; the dual tropical vertex
    vertex: Point2
    level: Fraction

    def edges(self) -> List[Tuple[Exponent, Exponent]]:
        n = len(self.polygon)
        return [(self.polygon[i], self.polygon[(i + 1) % n]) for i in range(n)]


@dataclass(frozen=True)
class Cell1:
    """A 1-cell; `cells` holds the one or two adjacent 2-cell ids (empty for a line)."""

    id: int
    endpoints: Tuple[Exponent, Exponent]
    points: Tuple[Exponent, ...]
    length: int
    cells: Tuple[int, ...]

    @property
    def on_boundary(self) -> bool:
        return len(self.cells) < 2


@dataclass(frozen=True)
class NewtonSubdivision:
    support: Tuple[Exponent, ...]
    lift: Tuple[Tuple[Exponent, Fraction], ...]
    polytope: LatticePolygon
    cells: Tuple[Cell, ...]
    cells1: Tuple[Cell1, ...]
    vertices0: Tuple[Exponent, ...]
    unused: Tuple[Exponent, ...]

    @property
    def dimension(self) -> int:
        return self.polytope.dimension

    def lift_of(self, v: Exponent) -> Fraction:
        return dict(self.lift)[tuple(v)]

    def cell(self, cell_id: int) -> Cell:
        return self.cells[cell_id]

    def cell1(self, cell1_id: int) -> Cell1:
        return self.cells1[cell1_id]

    def find_cell1(self, a: Exponent, b: Exponent) -> Optional[Cell1]:
        key = frozenset((tuple(a), tuple(b)))
        for c in self.cells1:
            if frozenset(c.endpoints) == key:
                return c
        return None

    def to_dict(self) -> dict:
        return {
            "support": [list(v) for v in self.support],
            "lift": [{"exp": list(v), "val": str(h)} for v, h in self.lift],
            "polytope": self.polytope.to_dict(),
            "cells": [
                {
                    "id": c.id,
                    "points": [list(p) for p in c.points],
                    "polygon": [list(p) for p in c.polygon],
                    "area2": c.area2,
                    "dual_vertex": c.id,
                }
                for c in self.cells
            ],
            "cells1": [
                {
                    "id": e.id,
                    "endpoints": [list(p) for p in e.endpoints],
                    "length": e.length,
                    "cells": list(e.cells),
                    "dual_edge": e.id,
                }
                for e in self.cells1
            ],
            "vertices0": [list(v) for v in self.vertices0],
            "unused": [list(v) for v in self.unused],
        }


def _lifted_points(W: LaurentSeries) -> Dict[Exponent, Fraction]:
    lift: Dict[Exponent, Fraction] = {}
    for v, c in W.coeffs:
        if c.valuation == INF:
            raise DegenerateLift(f"coefficient of {v} has no leading term")
        lift[v] = c.valuation
    return lift


def _on_segment(a: Exponent, b: Exponent, p: Exponent) -> bool:
    return cross(a, b, p) == 0 and min(a, b) <= p <= max(a, b)


def newton_subdivision(W: LaurentSeries) -> NewtonSubdivision:
    """
    Regular subdivision induced by the lower hull of (v, val(a_v)).

    Non-simplicial faces are kept as polygonal cells. Support points strictly
    above the lower hull belong to no cell and are reported in `unused`.

    Raises:
        EmptySeries: if W is zero.
    """
    if W.is_zero():
        raise EmptySeries("subdivision of the zero series")
    lift = _lifted_points(W)
    support = tuple(sorted(lift))
    polytope = LatticePolygon.hull_of(support)
    lift_items = tuple((v, lift[v]) for v in support)

    if polytope.dimension == 0:
        return NewtonSubdivision(support, lift_items, polytope, (), (), support, ())
    if polytope.dimension == 1:
        return _subdivide_segment(support, lift, polytope)

    denominator = math.lcm(*(h.denominator for h in lift.values()))
    lifted = {v: (v[0], v[1], int(lift[v] * denominator)) for v in support}

    faces: Dict[frozenset, Tuple[int, int, int]] = {}
    for p1, p2, p3 in combinations(support, 3):
        if cross(p1, p2, p3) == 0:
            continue
        P1, P2, P3 = lifted[p1], lifted[p2], lifted[p3]
        u = (P2[0] - P1[0], P2[1] - P1[1], P2[2] - P1[2])
        w = (P3[0] - P1[0], P3[1] - P1[1], P3[2] - P1[2])
        n = (
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        )
        if n[2] < 0:
            n = (-n[0], -n[1], -n[2])
        on_face = []
        lower = True
        for v in support:
            P = lifted[v]
            s = n[0] * (P[0] - P1[0]) + n[1] * (P[1] - P1[1]) + n[2] * (P[2] - P1[2])
            if s < 0:
                lower = False
                break
            if s == 0:
                on_face.append(v)
        if lower:
            faces.setdefault(frozenset(on_face), n)

    raw_cells = []
    for face_points, n in faces.items():
        vertex = (
            Fraction(n[0], n[2] * denominator),
            Fraction(n[1], n[2] * denominator),
        )
        v0 = min(face_points)
        level = lift[v0] + v0[0] * vertex[0] + v0[1] * vertex[1]
        polygon = tuple(convex_hull(face_points))
        raw_cells.append((vertex, tuple(sorted(face_points)), polygon, level))
    raw_cells.sort(key=lambda c: (c[0], c[2]))

    cells = tuple(
        Cell(
            id=i,
            points=pts,
            polygon=poly,
            area2=LatticePolygon(poly).area2,
            vertex=vertex,
            level=level,
        )
        for i, (vertex, pts, poly, level) in enumerate(raw_cells)
    )

    adjacency: Dict[frozenset, List[int]] = {}
    segment_points: Dict[frozenset, Tuple[Exponent, ...]] = {}
    for cell in cells:
        for a, b in cell.edges():
            key = frozenset((a, b))
            adjacency.setdefault(key, []).append(cell.id)
            segment_points[key] = tuple(p for p in cell.points if _on_segment(a, b, p))

    ordered = sorted(adjacency, key=lambda k: tuple(sorted(k)))
    cells1 = tuple(
        Cell1(
            id=i,
            endpoints=tuple(sorted(key)),
            points=segment_points[key],
            length=lattice_length(*sorted(key)),
            cells=tuple(sorted(adjacency[key])),
        )
        for i, key in enumerate(ordered)
    )

    used = sorted({p for cell in cells for p in cell.polygon})
    on_cells = {p for cell in cells for p in cell.points}
    unused = tuple(v for v in support if v not in on_cells)
    if unused:
        logger.debug("support points above the lower hull: %s", unused)
    return NewtonSubdivision(
        support, lift_items, polytope, cells, cells1, tuple(used), unused
    )


def _subdivide_segment(
    support: Tuple[Exponent, ...], lift: Dict[Exponent, Fraction], polytope: LatticePolygon
) -> NewtonSubdivision:
    """Collinear support: lower hull of (t, h) along the primitive direction of the line."""
    a, b = polytope.vertices
    d = primitive(sub(b, a))
    axis = 0 if d[0] != 0 else 1

    def t_of(v: Exponent) -> int:
        return (v[axis] - a[axis]) // d[axis]

    pts = sorted(support, key=t_of)
    hull: List[Exponent] = []
    for p in pts:
        while len(hull) >= 2:
            p1, p2 = hull[-2], hull[-1]
            t1, t2, t3 = t_of(p1), t_of(p2), t_of(p)
            # p2 lies on or above the chord p1-p
            if (lift[p2] - lift[p1]) * (t3 - t1) >= (lift[p] - lift[p1]) * (t2 - t1):
                hull.pop()
            else:
                break
        hull.append(p)

    cells1 = []
    for i in range(len(hull) - 1):
        p, q = hull[i], hull[i + 1]
        inner = tuple(
            v
            for v in pts
            if t_of(p) <= t_of(v) <= t_of(q)
            and (lift[v] - lift[p]) * (t_of(q) - t_of(p))
            == (lift[q] - lift[p]) * (t_of(v) - t_of(p))
        )
        cells1.append(
            Cell1(
                id=i,
                endpoints=tuple(sorted((p, q))),
                points=inner,
                length=lattice_length(p, q),
                cells=(),
            )
        )
    on_cells = {v for c in cells1 for v in c.points}
    unused = tuple(v for v in support if v not in on_cells)
    lift_items = tuple((v, lift[v]) for v in support)
    return NewtonSubdivision(
        support, lift_items, polytope, (), tuple(cells1), tuple(sorted(hull)), unused
    )
