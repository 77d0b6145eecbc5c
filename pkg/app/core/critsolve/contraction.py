from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from app.core.config import settings
from app.core.errors import ContractionPreconditionFailed, NoProgress
from app.core.novikov import INF, NovikovScalar, Valuation

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# CONTRACTION MODULE
# Purpose: solve F(w) = 0 for F(w) = L w + C + (higher order terms) over the
#          positive-valuation ring, by the fixed-point iteration
#          w <- w - L^-1 F(w).
# Why: at a non-convenient edge the leading Hessian is degenerate and the
#      ordinary lift cannot start; this iteration converges whenever the
#      diagonal of L dominates in valuation.
# -----------------------------------------------------------------------------


Pair = Tuple[NovikovScalar, NovikovScalar]
Residual = Callable[[NovikovScalar, NovikovScalar], Pair]


class Condition:
    DETERMINANT = "determinant"
    DIAGONAL = "diagonal-dominance"
    OFF_DIAGONAL = "off-diagonal-sum"
    MIXED = "mixed-terms"
    CONSTANT = "constant-gap"


@dataclass
class LocalSystem:
    """
    F1 = a w1 + b w2 + C1 + sum lam[(i, j)] w1^i w2^j
    F2 = c w1 + d w2 + C2 + sum eta[(i, j)] w1^i w2^j

    When `residual` is set it computes (F1, F2) exactly and the polynomial
    terms only serve the precondition check.
    """

    a: NovikovScalar
    b: NovikovScalar
    c: NovikovScalar
    d: NovikovScalar
    C1: NovikovScalar
    C2: NovikovScalar
    lam: Dict[Tuple[int, int], NovikovScalar] = field(default_factory=dict)
    eta: Dict[Tuple[int, int], NovikovScalar] = field(default_factory=dict)
    residual: Optional[Residual] = None

    @property
    def determinant(self) -> NovikovScalar:
        return self.a * self.d - self.b * self.c

    def evaluate(self, w1: NovikovScalar, w2: NovikovScalar) -> Pair:
        if self.residual is not None:
            return self.residual(w1, w2)
        f1 = self.a * w1 + self.b * w2 + self.C1
        f2 = self.c * w1 + self.d * w2 + self.C2
        for (i, j), coeff in self.lam.items():
            f1 = f1 + coeff * (w1 ** i) * (w2 ** j)
        for (i, j), coeff in self.eta.items():
            f2 = f2 + coeff * (w1 ** i) * (w2 ** j)
        return f1, f2


@dataclass
class ContractionResult:
    w1: NovikovScalar
    w2: NovikovScalar
    iterations: int
    eps_gap: Fraction
    # (val F1, val F2) before each step
    history: List[Tuple[Valuation, Valuation]]


def check_preconditions(system: LocalSystem) -> Fraction:
    """
    Verify the valuation hypotheses of the fixed-point argument and return the
    gap min(val C1 - val a, val C2 - val d).

    Raises:
        ContractionPreconditionFailed: naming the first violated condition.
    """
    det = system.determinant
    if det.is_zero():
        raise ContractionPreconditionFailed(Condition.DETERMINANT, "ad - bc vanishes")
    va, vb, vc, vd = (s.valuation for s in (system.a, system.b, system.c, system.d))
    if va == INF or vd == INF:
        raise ContractionPreconditionFailed(Condition.DIAGONAL, "a diagonal entry vanishes")
    if not (va <= vb and va <= vc and vd <= vb and vd <= vc):
        raise ContractionPreconditionFailed(
            Condition.DIAGONAL,
            f"need val a, val d <= val b, val c (a={va}, b={vb}, c={vc}, d={vd})",
        )
    if not va + vd < vb + vc:
        raise ContractionPreconditionFailed(
            Condition.OFF_DIAGONAL, f"need val a + val d < val b + val c ({va + vd} >= {vb + vc})"
        )
    for (i, j), coeff in system.lam.items():
        if j >= 1 and coeff.valuation < vd:
            raise ContractionPreconditionFailed(
                Condition.MIXED, f"term w1^{i} w2^{j} of F1 has valuation below val d"
            )
    for (i, j), coeff in system.eta.items():
        if i >= 1 and coeff.valuation < va:
            raise ContractionPreconditionFailed(
                Condition.MIXED, f"term w1^{i} w2^{j} of F2 has valuation below val a"
            )
    gap = min(system.C1.valuation - va, system.C2.valuation - vd)
    if gap <= 0:
        raise ContractionPreconditionFailed(
            Condition.CONSTANT, f"constant terms are not of higher order (gap {gap})"
        )
    return gap


def _shortfall(v: Valuation, goal: Valuation) -> Valuation:
    """v - goal, or v itself when there is no finite goal."""
    if v == INF:
        return INF
    return v if goal == INF else v - goal


def solve_contraction(
    system: LocalSystem,
    target: Optional[Tuple[Valuation, Valuation]] = None,
    max_iter: Optional[int] = None,
) -> ContractionResult:
    """
    Iterate w <- w - L^-1 F(w) from w = 0.

    Stops when val F1 >= target[0] and val F2 >= target[1] (default: F vanishes
    to working precision). Progress is measured by the smaller of
    val F_i - target[i], so a step that only improves one component still
    counts.

    Raises:
        ContractionPreconditionFailed: if the hypotheses fail.
        NoProgress: if the residual stalls or the iteration cap is reached.
    """
    gap = check_preconditions(system)
    cap = max_iter or settings.CONTRACTION_MAX_ITER
    inv_det = system.determinant.invert()
    order = min(system.a.trunc_order, system.d.trunc_order)
    w1 = NovikovScalar.zero(order)
    w2 = NovikovScalar.zero(order)
    goal = target or (INF, INF)

    history: List[Tuple[Valuation, Valuation]] = []
    previous: Valuation = -INF
    for it in range(cap + 1):
        f1, f2 = system.evaluate(w1, w2)
        v1, v2 = f1.valuation, f2.valuation
        history.append((v1, v2))
        if (v1 == INF or v1 >= goal[0]) and (v2 == INF or v2 >= goal[1]):
            logger.debug("contraction converged in %d iterations (gap %s)", it, gap)
            return ContractionResult(w1, w2, it, gap, history)
        # a component sitting at its goal must not mask progress in the other
        current = min(_shortfall(v1, goal[0]), _shortfall(v2, goal[1]))
        if current <= previous:
            raise NoProgress(
                f"contraction residual stalled at ({v1}, {v2}) short of {goal}"
            )
        previous = current
        if it == cap:
            break
        # L^-1 = (1/det) [[d, -b], [-c, a]]
        w1 = w1 - (system.d * f1 - system.b * f2) * inv_det
        w2 = w2 - (system.a * f2 - system.c * f1) * inv_det
    raise NoProgress(f"contraction did not converge in {cap} iterations; this is a solver bug")
