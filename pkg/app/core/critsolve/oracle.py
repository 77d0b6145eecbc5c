from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import sympy as sp

from app.core.laurent import LaurentSeries
from app.core.tropgeo.lattice import convex_hull

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# ORACLE MODULE
# Purpose: independent, symbolic check of critical point valuations. Clear
#          denominators, eliminate one variable by a resultant, and read root
#          valuations off the Newton polygon of the resultant in T.
# Why: the numeric solver and this elimination share no code beyond the
#      series type, so agreement between them is a meaningful test.
# -----------------------------------------------------------------------------


s, z1, z2 = sp.symbols("s z1 z2")


@dataclass(frozen=True)
class OracleResult:
    """Sorted valuation multisets of the two coordinates over all critical points."""

    z1: Tuple[Fraction, ...]
    z2: Tuple[Fraction, ...]
    denominator: int

    @property
    def count(self) -> int:
        return len(self.z2)


def _denominator(W: LaurentSeries) -> int:
    d = 1
    for _, c in W.coeffs:
        for e, _ in c.terms:
            d = d * e.denominator // math.gcd(d, e.denominator)
    return d


def _exact(c: complex) -> sp.Expr:
    return sp.nsimplify(sp.sympify(c), rational=True)


def to_sympy(W: LaurentSeries, D: int) -> sp.Expr:
    """W with T = s^D, as a Laurent polynomial in z1, z2, s."""
    expr = sp.Integer(0)
    for (p, q), c in W.coeffs:
        coeff = sum((_exact(a) * s ** int(e * D) for e, a in c.terms), sp.Integer(0))
        expr += coeff * z1 ** p * z2 ** q
    return expr


def _cleared(expr: sp.Expr) -> sp.Poly:
    """Multiply a Laurent polynomial by the monomial making it a polynomial with no monomial factor."""
    num, den = sp.fraction(sp.together(sp.expand(expr)))
    poly = sp.Poly(sp.expand(num), z1, z2, s)
    shifts = [min(m[i] for m in poly.monoms()) for i in range(3)]
    return sp.Poly(
        sp.expand(poly.as_expr() / (z1 ** shifts[0] * z2 ** shifts[1] * s ** shifts[2])),
        z1,
        z2,
        s,
    )


def newton_polygon_valuations(orders: Dict[int, int]) -> List[Fraction]:
    """
    Root valuations of sum a_i X^i where a_i has order orders[i] in s.

    Each lower hull segment from (i, o_i) to (j, o_j) contributes j - i roots
    of valuation (o_i - o_j) / (j - i).

    Example:
        newton_polygon_valuations({0: 3, 3: 0}) -> [1, 1, 1]
    """
    points = sorted(orders.items())
    hull = convex_hull(points)
    # lower hull: walk counterclockwise from the leftmost to the rightmost point
    start = hull.index(min(hull))
    lower: List[Tuple[int, int]] = []
    for t in range(len(hull)):
        pt = hull[(start + t) % len(hull)]
        lower.append(pt)
        if pt == max(hull):
            break
    values: List[Fraction] = []
    for (i, oi), (j, oj) in zip(lower, lower[1:]):
        values.extend([Fraction(oi - oj, j - i)] * (j - i))
    return values


def _root_valuations(res: sp.Expr, var: sp.Symbol, D: int) -> List[Fraction]:
    if res == 0:
        return []
    poly = sp.Poly(res, var, s)
    orders: Dict[int, int] = {}
    for (i, j), _ in poly.terms():
        orders[i] = min(orders.get(i, j), j)
    # z = 0 is never a critical point in the torus
    low = min(orders)
    orders = {i - low: o for i, o in orders.items()}
    if len(orders) < 2:
        return []
    return sorted(v / D for v in newton_polygon_valuations(orders))


def valuation_multisets(W: LaurentSeries) -> OracleResult:
    """
    Valuations of all critical points of W in the torus, one multiset per coordinate.

    Valid for series with generic coefficients; a vanishing resultant gives
    empty multisets and a warning.
    """
    D = _denominator(W)
    expr = to_sympy(W, D)
    f = _cleared(z1 * sp.diff(expr, z1)).as_expr()
    g = _cleared(z2 * sp.diff(expr, z2)).as_expr()
    r2 = sp.resultant(f, g, z1)
    r1 = sp.resultant(f, g, z2)
    if r1 == 0 or r2 == 0:
        logger.warning("resultant vanishes identically; coefficients are not generic")
    return OracleResult(
        z1=tuple(_root_valuations(sp.expand(r1), z1, D)),
        z2=tuple(_root_valuations(sp.expand(r2), z2, D)),
        denominator=D,
    )


def agrees_with(oracle: OracleResult, valuations: Iterable[Sequence[Fraction]]) -> bool:
    """True iff the coordinate-wise valuation multisets match."""
    vals = list(valuations)
    return Counter(v[0] for v in vals) == Counter(oracle.z1) and Counter(
        v[1] for v in vals
    ) == Counter(oracle.z2)
