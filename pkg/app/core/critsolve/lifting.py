from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import NoProgress, SingularHessian
from app.core.critsolve.leading import LeadingSystem
from app.core.critsolve.points import HessianData
from app.core.laurent import (
    Base,
    LaurentSeries,
    as_base,
    eval_units,
    leading_part,
    log_partial,
    partial,
    restrict_at,
)
from app.core.novikov import INF, NovikovScalar, Valuation, zero_tolerance

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# LIFTING MODULE
# Purpose: extend a nondegenerate leading root to a critical point of the full
#          series, order by order, using the fixed leading Jacobian.
# -----------------------------------------------------------------------------


Units = Tuple[NovikovScalar, NovikovScalar]


@dataclass(frozen=True)
class LiftResult:
    units: Units
    base: Base
    delta: Fraction
    residual_valuation: Valuation
    steps: int

    def coords(self) -> Units:
        return (self.units[0].shift(self.base[0]), self.units[1].shift(self.base[1]))


def normalized_series(W: LaurentSeries, base: Base, delta: Fraction) -> LaurentSeries:
    """T^-delta W(T^x u1, T^y u2) as a series in the units, exact below W.trunc_order."""
    order = W.trunc_order
    widened = W.with_trunc(order + max(delta, 0))
    return restrict_at(widened, base).shift(-delta).with_trunc(order)


def log_gradient_at(F: LaurentSeries, units: Units) -> Tuple[NovikovScalar, NovikovScalar]:
    return (eval_units(log_partial(F, 1), units), eval_units(log_partial(F, 2), units))


def normalized_residual(W: LaurentSeries, base: Iterable, units: Units, delta: Optional[Fraction] = None) -> Valuation:
    """
    Valuation of T^-delta (u1 dW/du1, u2 dW/du2) at the point.

    Returns W.trunc_order when the gradient vanishes to working precision.
    """
    b = as_base(base)
    if delta is None:
        delta = leading_part(W, b)[1]
    F = normalized_series(W, b, delta)
    g1, g2 = log_gradient_at(F, units)
    v = min(g1.valuation, g2.valuation)
    return F.trunc_order if v == INF else v


def lift(
    root: Tuple[complex, complex],
    W: LaurentSeries,
    base: Iterable,
    system: Optional[LeadingSystem] = None,
) -> LiftResult:
    """
    Graded Newton iteration u <- u - H0^-1 G(u) with the leading Jacobian H0 fixed.

    G is the log-gradient of T^-delta W restricted to the fiber over `base`.
    Every step cancels the lowest remaining residual order, so the valuation
    of the point stays equal to `base`.

    Raises:
        SingularHessian: if H0 is singular at the root.
        NoProgress: if the residual valuation stops increasing.
    """
    b = as_base(base)
    system = system or LeadingSystem.from_series(W, b)
    H0 = system.log_jacobian(*root)
    if abs(np.linalg.det(H0)) <= settings.ROOT_MERGE_TOL * max(1.0, np.abs(H0).max() ** 2):
        raise SingularHessian(f"leading Jacobian is singular at {root} over {b}")
    H0_inv = np.linalg.inv(H0)

    F = normalized_series(W, b, system.delta)
    G1, G2 = log_partial(F, 1), log_partial(F, 2)
    order = F.trunc_order
    u1 = NovikovScalar.constant(root[0], order)
    u2 = NovikovScalar.constant(root[1], order)

    previous: Valuation = -INF
    for step in range(settings.LIFT_MAX_STEPS):
        g1, g2 = eval_units(G1, (u1, u2)), eval_units(G2, (u1, u2))
        v = min(g1.valuation, g2.valuation)
        if v == INF:
            logger.debug("lift over %s converged after %d steps", b, step)
            return LiftResult((u1, u2), b, system.delta, order, step)
        if v <= previous:
            raise NoProgress(f"residual valuation stuck at {v} over {b}")
        previous = v
        u1 = u1 - (g1 * complex(H0_inv[0, 0]) + g2 * complex(H0_inv[0, 1]))
        u2 = u2 - (g1 * complex(H0_inv[1, 0]) + g2 * complex(H0_inv[1, 1]))
    raise NoProgress(f"lift over {b} hit the step cap {settings.LIFT_MAX_STEPS}")


# =========================
# Point data
# =========================
def hessian_leading(W: LaurentSeries, base: Iterable, units: Units) -> HessianData:
    """
    Hessian of W(T^x u1, T^y u2) in the units at the given point.

    `morse` comes from the full determinant, not from the reported leading
    slice `matrix`, which may be singular at a non-convenient edge.

    Example:
        hessian_leading(z1^2 + z2^2, (0, 0), (1, 1)).matrix -> ((2, 0), (0, 2))
    """
    R = restrict_at(W, as_base(base))
    d1, d2 = partial(R, 1), partial(R, 2)
    entries = [
        [eval_units(partial(d1, 1), units), eval_units(partial(d1, 2), units)],
        [eval_units(partial(d2, 1), units), eval_units(partial(d2, 2), units)],
    ]
    scale = min(e.valuation for row in entries for e in row)
    if scale == INF:
        matrix = ((0j, 0j), (0j, 0j))
    else:
        matrix = tuple(tuple(e.coefficient_at(scale) for e in row) for row in entries)
    det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0]
    morse = det.valuation != INF and abs(det.leading_coefficient) > zero_tolerance()
    return HessianData(
        matrix=matrix,
        scale=scale,
        det_leading=det.leading_coefficient,
        det_valuation=det.valuation,
        morse=morse,
    )


def critical_value(W: LaurentSeries, base: Iterable, units: Units) -> NovikovScalar:
    """W evaluated at (T^x u1, T^y u2)."""
    return eval_units(restrict_at(W, as_base(base)), units)
