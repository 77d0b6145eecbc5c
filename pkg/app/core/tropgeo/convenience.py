from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple, Union

from app.core.laurent import Exponent, LaurentSeries, newton_polytope
from app.core.tropgeo.lattice import LatticePolygon, det
from app.core.tropgeo.subdivision import Cell, Cell1, NewtonSubdivision

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# CONVENIENCE MODULE
# Purpose: convenience predicates for polygons, cells and series, and the
#          Kushnirenko count 2 x area(Newton polytope).
# -----------------------------------------------------------------------------


def _convenient_vertices(vertices: Sequence[Exponent]) -> bool:
    if len(vertices) == 1:
        return tuple(vertices[0]) != (0, 0)
    if len(vertices) == 2:
        return det(vertices[0], vertices[1]) != 0
    n = len(vertices)
    return all(det(vertices[i], vertices[(i + 1) % n]) != 0 for i in range(n))


def is_convenient(
    obj: Union[LaurentSeries, LatticePolygon, Cell, Cell1, Sequence[Exponent]]
) -> bool:
    """
    No two adjacent boundary vertices lie on a line through the origin.

    Example:
        is_convenient([(1, 0), (0, 1), (1, 1)]) -> True
        is_convenient([(0, 1), (0, -1)]) -> False
    """
    if isinstance(obj, LaurentSeries):
        return _convenient_vertices(newton_polytope(obj).vertices)
    if isinstance(obj, LatticePolygon):
        return _convenient_vertices(obj.vertices)
    if isinstance(obj, Cell):
        return _convenient_vertices(obj.polygon)
    if isinstance(obj, Cell1):
        return _convenient_vertices(obj.endpoints)
    return _convenient_vertices(LatticePolygon.hull_of(obj).vertices)


@dataclass
class ConvenienceReport:
    ok: bool
    bad_cells1: List[Cell1] = field(default_factory=list)
    bad_cells: List[Cell] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "bad_cells1": [[list(p) for p in c.endpoints] for c in self.bad_cells1],
            "bad_cells": [[list(p) for p in c.polygon] for c in self.bad_cells],
        }


def is_locally_convenient(S: NewtonSubdivision) -> ConvenienceReport:
    """Check every cell of S; the report lists the failing 1-cells and 2-cells."""
    bad1 = [c for c in S.cells1 if not is_convenient(c)]
    bad2 = [c for c in S.cells if not is_convenient(c)]
    return ConvenienceReport(ok=not bad1 and not bad2, bad_cells1=bad1, bad_cells=bad2)


def kushnirenko_count(W: LaurentSeries) -> int:
    """
    2 x lattice area of the Newton polytope.

    For a non-convenient W this is only an upper-bound heuristic; a warning is logged.
    """
    polytope = newton_polytope(W)
    if not _convenient_vertices(polytope.vertices):
        logger.warning("kushnirenko_count on a non-convenient series; count is heuristic")
    return polytope.area2


def offending_interior_cells1(S: NewtonSubdivision) -> Iterable[Cell1]:
    return (c for c in S.cells1 if len(c.cells) == 2 and not is_convenient(c))
