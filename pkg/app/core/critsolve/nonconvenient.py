from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.core.critsolve.contraction import LocalSystem, solve_contraction
from app.core.critsolve.lifting import critical_value, hessian_leading, normalized_residual
from app.core.critsolve.points import CriticalPoint, origin_edge
from app.core.errors import NotAnEdgeCase, UnsupportedEdgeShape
from app.core.laurent import (
    Base,
    Exponent,
    LaurentSeries,
    eval_units,
    partial,
    restrict_at,
)
from app.core.novikov import NovikovScalar
from app.core.tropgeo.convenience import is_convenient
from app.core.tropgeo.lattice import is_primitive
from app.core.tropgeo.subdivision import Cell1, NewtonSubdivision, newton_subdivision

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# NON-CONVENIENT EDGE MODULE
# Purpose: critical points sitting in the interior of a tropical edge whose
#          dual 1-cell passes through the origin.
# Why: there the leading Laurent polynomial has no isolated critical points,
#      so the vertex solve finds nothing; the points appear at second order
#      and are pinned down by the contraction solver.
# -----------------------------------------------------------------------------


Matrix = Tuple[Tuple[int, int], Tuple[int, int]]
ORIGIN_EXP: Exponent = (0, 0)


def _ext_gcd(a: int, b: int) -> Tuple[int, int]:
    """(x, y) with a x + b y = gcd(a, b)."""
    if b == 0:
        return (1 if a >= 0 else -1), 0
    x, y = _ext_gcd(b, a % b)
    return y, x - (a // b) * y


def normalizing_matrix(d: Exponent) -> Matrix:
    """
    Unimodular M with M d = (0, 1).

    Example:
        normalizing_matrix((0, 1)) -> ((1, 0), (0, 1))
    """
    if not is_primitive(d):
        raise UnsupportedEdgeShape(f"edge direction {d} is not primitive")
    x, y = _ext_gcd(d[0], d[1])
    return ((d[1], -d[0]), (x, y))


def _apply(M: Matrix, v: Exponent) -> Exponent:
    return (M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1])


def _apply_transpose(M: Matrix, x: Base) -> Base:
    return (M[0][0] * x[0] + M[1][0] * x[1], M[0][1] * x[0] + M[1][1] * x[1])


def transform_series(W: LaurentSeries, M: Matrix) -> LaurentSeries:
    """Rewrite W in coordinates z' with z^v = z'^(M v)."""
    return LaurentSeries.from_dict({_apply(M, v): c for v, c in W.coeffs}, W.trunc_order)


@dataclass(frozen=True)
class EdgeShape:
    """
    Normalized data of a non-convenient interior 1-cell.

    After the change of lattice basis M the 1-cell joins (0, -1) and (0, 1),
    the adjacent triangles have apexes A = (i, j) with i > 0 and B = (k, l)
    with k < 0, and the critical points sit over x' = (X, Y).
    """

    edge_id: int
    matrix: Matrix
    apex_a: Exponent
    apex_b: Exponent
    X: Fraction
    Y: Fraction
    delta_edge: Fraction
    delta_apex: Fraction
    lead: Dict[Exponent, complex]

    @property
    def i(self) -> int:
        return self.apex_a[0]

    @property
    def j(self) -> int:
        return self.apex_a[1]

    @property
    def k(self) -> int:
        return self.apex_b[0]

    @property
    def l(self) -> int:
        return self.apex_b[1]

    @property
    def point_count(self) -> int:
        return 2 * (self.i - self.k)

    @property
    def base(self) -> Base:
        """Valuation of the critical points in the original coordinates."""
        return _apply_transpose(self.matrix, (self.X, self.Y))

    def to_dict(self) -> dict:
        return {
            "edge": self.edge_id,
            "matrix": [list(r) for r in self.matrix],
            "apex_a": list(self.apex_a),
            "apex_b": list(self.apex_b),
            "base": [str(x) for x in self.base],
            "delta_edge": str(self.delta_edge),
            "delta_apex": str(self.delta_apex),
            "point_count": self.point_count,
        }


def edge_shape(W: LaurentSeries, S: NewtonSubdivision, edge: Cell1) -> EdgeShape:
    """
    Check that `edge` has the two-triangle shape the edge solver handles and
    compute where its critical points sit.

    Raises:
        NotAnEdgeCase: if the 1-cell is convenient.
        UnsupportedEdgeShape: for boundary edges, non-triangular neighbours,
            or when another monomial competes with the apex terms.
    """
    if is_convenient(edge):
        raise NotAnEdgeCase(f"1-cell {edge.endpoints} is convenient")
    if edge.on_boundary:
        raise UnsupportedEdgeShape(f"1-cell {edge.endpoints} lies on the boundary")
    p, q = edge.endpoints
    if q != (-p[0], -p[1]):
        raise UnsupportedEdgeShape(f"1-cell {edge.endpoints} is not symmetric about the origin")
    M = normalizing_matrix(p)
    ends = {p, q}

    apexes: List[Exponent] = []
    for cell_id in edge.cells:
        cell = S.cell(cell_id)
        pts = [v for v in cell.points if v != ORIGIN_EXP]
        if len(pts) != 3 or len(cell.polygon) != 3:
            raise UnsupportedEdgeShape(
                f"cell {cell_id} next to 1-cell {edge.endpoints} is not a bare triangle"
            )
        (apex,) = [v for v in pts if v not in ends]
        apexes.append(_apply(M, apex))
    apexes.sort(reverse=True)
    A, B = apexes
    if not (A[0] > 0 > B[0]):
        raise UnsupportedEdgeShape(f"apexes {A}, {B} are not on opposite sides")

    Wn = transform_series(W, M)
    plus, minus = Wn[(0, 1)], Wn[(0, -1)]
    cA, cB = Wn[A], Wn[B]
    i, j = A
    k, l = B
    Y = (minus.valuation - plus.valuation) / 2
    X = (cB.valuation - cA.valuation + (l - j) * Y) / (i - k)
    delta_edge = (plus.valuation + minus.valuation) / 2
    delta_apex = cA.valuation + i * X + j * Y
    if delta_apex <= delta_edge:
        raise UnsupportedEdgeShape(
            f"apex level {delta_apex} does not exceed edge level {delta_edge}"
        )
    for v, c in Wn.coeffs:
        if v in ((0, 1), (0, -1), A, B, ORIGIN_EXP):
            continue
        if c.valuation + v[0] * X + v[1] * Y <= delta_apex:
            raise UnsupportedEdgeShape(f"monomial {v} competes with the apex terms")

    lead = {v: Wn[v].leading_coefficient for v in ((0, 1), (0, -1), A, B)}
    return EdgeShape(edge.id, M, A, B, Fraction(X), Fraction(Y), Fraction(delta_edge), Fraction(delta_apex), lead)


def _third(R: LaurentSeries, axes: Tuple[int, int, int]) -> LaurentSeries:
    out = R
    for a in axes:
        out = partial(out, a)
    return out


def _seeds(shape: EdgeShape) -> List[Tuple[complex, complex]]:
    """Leading unit pairs (rho, s): s^2 = c-/c+, rho^(i-k) = -(k cB / i cA) s^(l-j)."""
    lead = shape.lead
    s0 = cmath.sqrt(lead[(0, -1)] / lead[(0, 1)])
    n = shape.i - shape.k
    seeds = []
    for s in (s0, -s0):
        target = -(shape.k * lead[shape.apex_b]) / (shape.i * lead[shape.apex_a]) * s ** (shape.l - shape.j)
        r, phi = abs(target) ** (1.0 / n), cmath.phase(target)
        for m in range(n):
            seeds.append((r * cmath.exp(1j * (phi + 2 * math.pi * m) / n), s))
    return seeds


def solve_nonconvenient(
    W: LaurentSeries,
    edge: Cell1,
    subdivision: Optional[NewtonSubdivision] = None,
    leading: Optional[LaurentSeries] = None,
) -> List[CriticalPoint]:
    """
    All critical points over the tropical edge dual to `edge`.

    In normalized coordinates each point is z'2 = T^Y (s + w2), z'1 = T^X (rho + w1)
    for s = +-sqrt(c-/c+) and each (i-k)-th root rho. The corrections (w1, w2)
    solve the gradient equations expanded around (rho, s), found by the
    contraction iteration with the Hessian at (rho, s) as linear part.

    Args:
        W: the full series.
        edge: a non-convenient interior 1-cell.
        subdivision: subdivision the 1-cell belongs to (default: of `leading`).
        leading: series whose subdivision defines the cells (default W).

    Returns:
        2 (i - k) points, every one at the same valuation.

    Raises:
        NotAnEdgeCase, UnsupportedEdgeShape: see `edge_shape`.
        ContractionPreconditionFailed: if the expanded system violates the
            valuation hypotheses.

    Example:
        solve_nonconvenient(W_Fk, S.find_cell1((0, 1), (0, -1)))
        # 4 points at (a/2 - k b/4, b/2)
    """
    S = subdivision or newton_subdivision(leading or W)
    shape = edge_shape(W, S, edge)
    N = W.trunc_order
    Wn = transform_series(W, shape.matrix)

    # precision to spare for the division by det L
    guess = max(shape.delta_apex, shape.delta_edge, Fraction(0))
    working = N + max(shape.delta_edge, Fraction(0)) + 2 * guess + 1
    R = restrict_at(Wn.with_trunc(working), (shape.X, shape.Y))
    D1, D2 = partial(R, 1), partial(R, 2)
    H11, H12, H22 = partial(D1, 1), partial(D1, 2), partial(D2, 2)
    third = {
        axes: _third(R, axes)
        for axes in ((1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2))
    }

    base = shape.base
    points: List[CriticalPoint] = []
    for index, (rho, s) in enumerate(_seeds(shape)):
        u0 = (NovikovScalar.constant(rho, working), NovikovScalar.constant(s, working))

        def at(series: LaurentSeries, units=u0) -> NovikovScalar:
            return eval_units(series, units)

        def residual(w1: NovikovScalar, w2: NovikovScalar, u0=u0):
            units = (u0[0] + w1, u0[1] + w2)
            return eval_units(D1, units), eval_units(D2, units)

        system = LocalSystem(
            a=at(H11),
            b=at(H12),
            c=at(H12),
            d=at(H22),
            C1=at(D1),
            C2=at(D2),
            lam={
                (2, 0): at(third[(1, 1, 1)]) * 0.5,
                (1, 1): at(third[(1, 1, 2)]),
                (0, 2): at(third[(1, 2, 2)]) * 0.5,
            },
            eta={
                (2, 0): at(third[(1, 1, 2)]) * 0.5,
                (1, 1): at(third[(1, 2, 2)]),
                (0, 2): at(third[(2, 2, 2)]) * 0.5,
            },
            residual=residual,
        )
        target = (N + system.a.valuation, N + system.d.valuation)
        result = solve_contraction(system, target=target)
        logger.debug(
            "edge %d seed %d: contraction took %d steps (gap %s)",
            edge.id, index, result.iterations, result.eps_gap,
        )

        v1 = (u0[0] + result.w1).truncate(N)
        v2 = (u0[1] + result.w2).truncate(N)
        M = shape.matrix
        units = (
            ((v1 ** M[0][0]) * (v2 ** M[1][0])).truncate(N),
            ((v1 ** M[0][1]) * (v2 ** M[1][1])).truncate(N),
        )
        coords = (units[0].shift(base[0]), units[1].shift(base[1]))
        points.append(
            CriticalPoint(
                coords=coords,
                units=units,
                valuation=base,
                kind="toric",
                geometric=True,
                origin=origin_edge(edge.id),
                index=index,
                critical_value=critical_value(W, base, units),
                hessian=hessian_leading(W, base, units),
                residual_valuation=normalized_residual(W, base, units),
            )
        )
    logger.info("edge %d: %d critical points at %s", edge.id, len(points), base)
    return points
