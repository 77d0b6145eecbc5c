from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.core.laurent import Exponent, LaurentSeries
from app.core.tropgeo.lattice import dot, primitive, rot_left, sub
from app.core.tropgeo.subdivision import NewtonSubdivision, Point2, newton_subdivision

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# CURVE MODULE
# Purpose: the tropical curve Trop(W), i.e. the corner locus of
#          min_v (val(a_v) + <v, x>), built as the dual graph of the subdivision.
# Why: critical points of W have valuations on this graph, and the solvers walk
#      its vertices and edges.
# -----------------------------------------------------------------------------


class EdgeKind:
    BOUNDED = "bounded"
    RAY = "ray"
    LINE = "line"


@dataclass(frozen=True)
class TropicalVertex:
    id: int
    coords: Point2
    weight: int
    dual_cell: int


@dataclass(frozen=True)
class TropicalEdge:
    """
    Edge of Trop(W).

    Bounded edges join `start` and `end`. Rays leave `start` along `direction`.
    Lines (collinear support only) pass through `anchor` along `direction`.
    """

    id: int
    kind: str
    start: Optional[int]
    end: Optional[int]
    anchor: Point2
    direction: Tuple[int, int]
    weight: int
    dual_cell1: int


@dataclass(frozen=True)
class Chamber:
    """Region where the monomial `exponent` alone attains the minimum."""

    exponent: Exponent
    constant: Fraction

    def value(self, x: Point2) -> Fraction:
        return self.constant + self.exponent[0] * x[0] + self.exponent[1] * x[1]


@dataclass(frozen=True)
class TropicalCurve:
    vertices: Tuple[TropicalVertex, ...]
    edges: Tuple[TropicalEdge, ...]
    chambers: Tuple[Chamber, ...]
    subdivision: NewtonSubdivision

    def vertex(self, vertex_id: int) -> TropicalVertex:
        return self.vertices[vertex_id]

    def incident(self, vertex_id: int) -> List[Tuple[TropicalEdge, Tuple[int, int]]]:
        """Edges at a vertex with their primitive directions pointing away from it."""
        out = []
        for e in self.edges:
            if e.start == vertex_id:
                out.append((e, e.direction))
            elif e.end == vertex_id:
                out.append((e, (-e.direction[0], -e.direction[1])))
        return out

    def tropical_value(self, x: Point2) -> Fraction:
        return min(ch.value(x) for ch in self.chambers)

    def minimizers(self, x: Point2) -> List[Exponent]:
        values = {ch.exponent: ch.value(x) for ch in self.chambers}
        best = min(values.values())
        return sorted(v for v, val in values.items() if val == best)

    def to_dict(self) -> dict:
        return {
            "vertices": [
                {
                    "id": v.id,
                    "coords": [str(v.coords[0]), str(v.coords[1])],
                    "weight": v.weight,
                    "dual_cell": v.dual_cell,
                }
                for v in self.vertices
            ],
            "edges": [
                {
                    "id": e.id,
                    "kind": e.kind,
                    "start": e.start,
                    "end": e.end,
                    "anchor": [str(e.anchor[0]), str(e.anchor[1])],
                    "direction": list(e.direction),
                    "weight": e.weight,
                    "dual_cell1": e.dual_cell1,
                }
                for e in self.edges
            ],
            "chambers": [
                {"exp": list(ch.exponent), "constant": str(ch.constant)}
                for ch in self.chambers
            ],
        }


def _oriented_normal(a: Exponent, b: Exponent, towards: Tuple[Fraction, Fraction]) -> Tuple[int, int]:
    n = primitive(rot_left(sub(b, a)))
    if dot(n, towards) < 0:
        n = (-n[0], -n[1])
    return n


def curve_from_subdivision(S: NewtonSubdivision) -> TropicalCurve:
    """Dual graph of a subdivision; ids are shared with the dual cells."""
    lift = dict(S.lift)
    chambers = tuple(Chamber(v, lift[v]) for v in S.vertices0)

    vertices = tuple(
        TropicalVertex(id=c.id, coords=c.vertex, weight=c.area2, dual_cell=c.id)
        for c in S.cells
    )

    edges: List[TropicalEdge] = []
    for c1 in S.cells1:
        a, b = c1.endpoints
        if len(c1.cells) == 2:
            i, j = c1.cells
            pi, pj = S.cells[i].vertex, S.cells[j].vertex
            direction = _oriented_normal(a, b, sub(pj, pi))
            edges.append(
                TropicalEdge(c1.id, EdgeKind.BOUNDED, i, j, pi, direction, c1.length, c1.id)
            )
        elif len(c1.cells) == 1:
            (i,) = c1.cells
            cell = S.cells[i]
            inside = next(p for p in cell.polygon if p not in (a, b))
            # inward normal of the polytope edge a-b
            n = primitive(rot_left(sub(b, a)))
            if dot(n, sub(inside, a)) < 0:
                n = (-n[0], -n[1])
            edges.append(
                TropicalEdge(c1.id, EdgeKind.RAY, i, None, cell.vertex, n, c1.length, c1.id)
            )
        else:
            d = sub(b, a)
            norm2 = d[0] * d[0] + d[1] * d[1]
            t = (lift[a] - lift[b]) / norm2
            anchor = (t * d[0], t * d[1])
            edges.append(
                TropicalEdge(
                    c1.id,
                    EdgeKind.LINE,
                    None,
                    None,
                    anchor,
                    primitive(rot_left(d)),
                    c1.length,
                    c1.id,
                )
            )
    return TropicalCurve(vertices, tuple(edges), chambers, S)


def tropicalize(W: LaurentSeries) -> TropicalCurve:
    """
    Trop(W) with exact rational vertices, weighted edges and labelled chambers.

    Example:
        tropicalize(z1 + z2 + T^a/(z1 z2)) -> one vertex at (a/3, a/3), three rays
    """
    return curve_from_subdivision(newton_subdivision(W))


# =========================
# Invariants
# =========================
def balancing_defect(curve: TropicalCurve, vertex_id: int) -> Tuple[int, int]:
    """Sum of weight * outgoing primitive direction; zero for a balanced vertex."""
    sx, sy = 0, 0
    for e, d in curve.incident(vertex_id):
        sx += e.weight * d[0]
        sy += e.weight * d[1]
    return (sx, sy)


def is_balanced(curve: TropicalCurve) -> bool:
    return all(balancing_defect(curve, v.id) == (0, 0) for v in curve.vertices)


def vertex_multiplicity(curve: TropicalCurve, vertex_id: int) -> int:
    """
    w1 w2 |det(d1, d2)| for a trivalent vertex, the dual cell's 2 x area otherwise.

    Raises:
        AssertionError: if the two formulas disagree at a trivalent vertex.
    """
    vertex = curve.vertex(vertex_id)
    incident = curve.incident(vertex_id)
    if len(incident) == 3:
        (e1, d1), (e2, d2) = incident[0], incident[1]
        mult = e1.weight * e2.weight * abs(d1[0] * d2[1] - d1[1] * d2[0])
        assert mult == vertex.weight, (
            f"vertex {vertex_id}: determinant multiplicity {mult} != cell area {vertex.weight}"
        )
        return mult
    return vertex.weight


def total_weight(curve: TropicalCurve) -> int:
    return sum(v.weight for v in curve.vertices)


def locate(curve: TropicalCurve, x: Point2) -> Dict[str, object]:
    """Classify a point as a vertex, an edge point or a chamber point."""
    for v in curve.vertices:
        if v.coords == tuple(x):
            return {"kind": "vertex", "id": v.id}
    minimizers = curve.minimizers(x)
    if len(minimizers) == 1:
        return {"kind": "chamber", "exponent": minimizers[0]}
    return {"kind": "edge", "minimizers": minimizers}


def edge_weight_matches_dual(curve: TropicalCurve) -> bool:
    return all(
        e.weight == math.gcd(*sub(*curve.subdivision.cell1(e.dual_cell1).endpoints))
        for e in curve.edges
    )
