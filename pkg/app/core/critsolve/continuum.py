from __future__ import annotations

import cmath
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.critsolve.leading import LeadingSystem, solve_leading
from app.core.critsolve.oracle import newton_polygon_valuations
from app.core.errors import (
    ArithmeticFailure,
    DegenerateConfiguration,
    ModelError,
    NoProgress,
    OutOfRange,
    SingularHessian,
)
from app.core.laurent import Base, Exponent, LaurentSeries, binomial, log_partial, partial
from app.core.novikov import (
    INF,
    NovikovScalar,
    RationalLike,
    Valuation,
    as_fraction,
    format_fraction,
    zero_tolerance,
)
from app.core.toricmodel import ToricSurfaceModel, hori_vafa, toric_blowup
from app.core.tropgeo.subdivision import newton_subdivision

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# CONTINUUM MODULE
# Purpose: the F_k surface blown up at the corner between (1, 0) and (0, 1)
#          with size exactly b/2, deformed by the bulk term T^eps z1. Its
#          critical points move linearly with eps.
# Why: at this special Kahler form the four monomials z1, z2, T^(-b/2) z1 z2
#      and T^b / z2 tie on one quadrilateral cell, so the generic pipeline
#      cannot start. The points are solved branch by branch in the charts
#      z2 = T^(b/2) (s + w) instead.
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuumParams:
    k: int
    a: Fraction
    b: Fraction

    @property
    def a_eff(self) -> Fraction:
        """a - k b / 2: the level of T^a z1^-1 z2^-k once z2 is normalized."""
        return self.a - Fraction(self.k) * self.b / 2

    @property
    def upper(self) -> Fraction:
        return (self.a_eff - self.b) / 3

    @property
    def fixed_point(self) -> Base:
        return (self.a_eff / 2, self.b / 2)

    @property
    def merge_point(self) -> Base:
        """Where the three moving points meet as eps reaches the upper bound."""
        return ((self.a_eff + self.b / 2) / 3, self.b / 2)

    @property
    def corner_point(self) -> Base:
        return (self.b / 2, self.b / 2)


@dataclass(frozen=True)
class ContinuumPoint:
    """
    A critical point of the bulk-deformed potential.

    `valuation` is (val z1, val z2); `local` is (val z1, val z2+) where
    z2 = T^(b/2) (s + z2+) on the branch s = +1 or -1. `residual` is the
    smallest valuation of z_i dW/dz_i at the solved point, unset for the
    closed-form positions.
    """

    branch: int
    label: str
    valuation: Base
    local: Tuple[Fraction, Fraction]
    multiplicity: int
    residual: Optional[Valuation] = None

    @property
    def key(self) -> tuple:
        return (self.branch, self.label, self.valuation, self.local, self.multiplicity)

    def to_dict(self) -> dict:
        out = {
            "branch": self.branch,
            "label": self.label,
            "valuation": [format_fraction(x) for x in self.valuation],
            "local": [format_fraction(x) for x in self.local],
            "multiplicity": self.multiplicity,
        }
        if self.residual is not None:
            out["residual"] = "inf" if self.residual == INF else format_fraction(self.residual)
        return out


def continuum_model(
    k: int, a: RationalLike, b: RationalLike, trunc_order: Optional[RationalLike] = None
) -> ToricSurfaceModel:
    """
    F_k with moment polytope parameters (a, b), blown up at corner 0 with size b/2.

    Raises:
        ModelError: if a - k b / 2 <= b, i.e. the F_k edge shape is missing.
    """
    a, b = as_fraction(a), as_fraction(b)
    if k < 0:
        raise ModelError(f"F_k needs k >= 0, got {k}")
    if a - Fraction(k) * b / 2 <= b:
        raise ModelError(f"need a - k b / 2 > b for the F_k shape, got a={a}, b={b}")
    base = ToricSurfaceModel(
        rays=((1, 0), (0, 1), (-1, -k), (0, -1)),
        lambdas=(0, 0, a, b),
        trunc_order=trunc_order,
        name=f"F{k}-blowup",
    )
    return toric_blowup(base, 0, b / 2)


def continuum_params(m: ToricSurfaceModel) -> ContinuumParams:
    """
    Read (k, a, b) off a model built by `continuum_model`.

    Raises:
        ModelError: if the model is not F_k blown up at corner 0 with size b/2.
    """
    rays = m.rays
    if m.N != 5 or m.nontoric or rays[0] != (1, 0) or rays[1] != (1, 1) or rays[2] != (0, 1):
        raise ModelError(f"{m.name} is not F_k blown up between (1, 0) and (0, 1)")
    if rays[4] != (0, -1) or rays[3][0] != -1:
        raise ModelError(f"{m.name} is not F_k blown up between (1, 0) and (0, 1)")
    k = -rays[3][1]
    lam = m.lambdas
    if lam[0] != 0 or lam[2] != 0:
        raise ModelError("the continuum model needs lambda = 0 on (1, 0) and (0, 1)")
    a, b = lam[3], lam[4]
    c = -lam[1]
    if c != b / 2:
        raise ModelError(
            f"no continuum: blowup size {format_fraction(c)} differs from b/2 = {format_fraction(b / 2)}"
        )
    return ContinuumParams(k, a, b)


def bulk_deformed(m: ToricSurfaceModel, eps: RationalLike) -> LaurentSeries:
    """W^HV + T^eps z1."""
    W = hori_vafa(m)
    bulk = LaurentSeries.from_monomials([((1, 0), as_fraction(eps), 1)], W.trunc_order)
    return W + bulk


def _check_range(p: ContinuumParams, eps: Fraction) -> None:
    if not 0 < eps < p.upper:
        raise OutOfRange(
            f"eps = {format_fraction(eps)} outside (0, {format_fraction(p.upper)})",
            eps=eps,
            upper=p.upper,
        )


def _predicted(p: ContinuumParams, eps: Fraction) -> List[ContinuumPoint]:
    half_b = p.b / 2
    moving = (p.a_eff - eps) / 2
    return [
        ContinuumPoint(1, "fixed", p.fixed_point, (p.a_eff / 2, (p.a_eff - p.b) / 2), 2),
        ContinuumPoint(-1, "bulk", (eps + half_b, half_b), (eps + half_b, eps), 1),
        ContinuumPoint(-1, "pair", (moving, half_b), (moving, (p.a_eff - p.b - eps) / 2), 2),
    ]


def predicted_points(m: ToricSurfaceModel, eps: RationalLike) -> List[ContinuumPoint]:
    """
    Closed-form positions for 0 < eps < (a - k b / 2 - b) / 3.

    With a' = a - k b / 2 and z2 = T^(b/2) (s + z2+):
      s = +1: two points at (a'/2, b/2), unaffected by the bulk term, with
              val z2+ = (a' - b) / 2;
      s = -1: one point with (val z1, val z2+) = (eps + b/2, eps), from
              z1 z2+ against T^eps z1, and two points with
              (val z1, val z2+) = ((a' - eps)/2, (a' - b - eps)/2), from
              T^a' / z1 against T^eps z1.

    Raises:
        OutOfRange: if eps is outside the open range.
    """
    p = continuum_params(m)
    eps = as_fraction(eps)
    _check_range(p, eps)
    return _predicted(p, eps)


# =========================
# Branch charts and seeds
# =========================
@dataclass(frozen=True)
class _Branch:
    sign: int
    s: complex
    half: Fraction


@dataclass(frozen=True)
class _Seed:
    label: str
    z1: NovikovScalar
    w: NovikovScalar


def _branches(W: LaurentSeries) -> List[_Branch]:
    """The two square roots of c- / c+ for the monomials z2 and z2^-1."""
    plus, minus = W[(0, 1)], W[(0, -1)]
    if plus.is_zero() or minus.is_zero():
        raise ModelError("the bulk-deformed potential needs both z2 and z2^-1")
    s0 = cmath.sqrt(minus.leading_coefficient / plus.leading_coefficient)
    half = (minus.valuation - plus.valuation) / 2
    return [_Branch(1, s0, half), _Branch(-1, -s0, half)]


def _branch_chart(W: LaurentSeries, branch: _Branch, degree: int = 2) -> LaurentSeries:
    """
    W(z1, T^half (s + w)) up to w^degree, as a series in (z1, w).

    The constant term is dropped; on either branch the linear term in w
    cancels against itself.
    """
    acc: Dict[Exponent, NovikovScalar] = {}
    for (p, q), c in W.coeffs:
        shifted = c.shift(q * branch.half)
        for j in range(degree + 1):
            factor = binomial(q, j) * branch.s ** (q - j)
            if factor == 0:
                continue
            term = shifted * complex(factor)
            acc[(p, j)] = acc[(p, j)] + term if (p, j) in acc else term
    acc.pop((0, 0), None)
    return LaurentSeries.from_dict(acc, W.trunc_order)


def _axis_seeds(chart: LaurentSeries, order: Fraction) -> List[NovikovScalar]:
    """Roots z1 of z1 d/dz1 of the w-free part, one seed per root."""
    axis = {v[0]: c for v, c in chart.coeffs if v[1] == 0 and v[0] != 0}
    if len(axis) < 2:
        return []
    low = min(axis)
    seeds: List[NovikovScalar] = []
    for x in sorted(set(newton_polygon_valuations({p - low: c.valuation for p, c in axis.items()}))):
        levels = {p: c.valuation + p * x for p, c in axis.items()}
        floor = min(levels.values())
        active = {p: p * axis[p].leading_coefficient for p in axis if levels[p] == floor}
        top = max(active) - low
        coeffs = np.zeros(top + 1, dtype=complex)
        for p, c in active.items():
            coeffs[top - (p - low)] += c
        for rho in np.roots(np.trim_zeros(coeffs, "f")):
            if abs(rho) > zero_tolerance():
                seeds.append(NovikovScalar.monomial(x, complex(rho), order))
    return seeds


def _vertex_seeds(chart: LaurentSeries, order: Fraction) -> List[Tuple[NovikovScalar, NovikovScalar]]:
    """Leading roots at tropical vertices of the chart with val w > 0."""
    seeds: List[Tuple[NovikovScalar, NovikovScalar]] = []
    for cell in newton_subdivision(chart).cells:
        x, y = cell.vertex
        if y <= 0:
            continue
        try:
            roots = solve_leading(LeadingSystem.from_series(chart, cell.vertex))
        except DegenerateConfiguration:
            logger.debug("no isolated leading roots at vertex (%s, %s)", x, y)
            continue
        for root in roots:
            u1, u2 = root.units
            seeds.extend(
                [(NovikovScalar.monomial(x, u1, order), NovikovScalar.monomial(y, u2, order))]
                * root.multiplicity
            )
    return seeds


# =========================
# Newton on the full potential
# =========================
def _evaluate_all(
    series: Sequence[LaurentSeries], point: Tuple[NovikovScalar, NovikovScalar]
) -> List[NovikovScalar]:
    """eval_units over several series sharing the coordinate powers."""
    powers: Dict[Tuple[int, int], NovikovScalar] = {}

    def power(axis: int, k: int) -> NovikovScalar:
        if (axis, k) not in powers:
            if k < -1:
                powers[(axis, k)] = power(axis, -1) ** (-k)
            else:
                powers[(axis, k)] = point[axis] ** k
        return powers[(axis, k)]

    out = []
    for W in series:
        total = NovikovScalar.zero(W.trunc_order)
        for v, c in W.coeffs:
            total = total + c * power(0, v[0]) * power(1, v[1])
        out.append(total)
    return out


def _newton(
    W: LaurentSeries, z1: NovikovScalar, z2: NovikovScalar, goal: Fraction
) -> Tuple[NovikovScalar, NovikovScalar, int]:
    """
    Newton iteration on grad W = 0 from (z1, z2).

    Stops once both corrections have valuation >= goal.

    Raises:
        SingularHessian: if the Hessian determinant vanishes at an iterate.
        NoProgress: if a correction is not smaller than the previous one.
    """
    D1, D2 = partial(W, 1), partial(W, 2)
    derivatives = (D1, D2, partial(D1, 1), partial(D1, 2), partial(D2, 2))
    previous: Valuation = -INF
    for it in range(1, settings.CONTRACTION_MAX_ITER + 1):
        f1, f2, h11, h12, h22 = _evaluate_all(derivatives, (z1, z2))
        det = h11 * h22 - h12 * h12
        if det.is_zero():
            raise SingularHessian("Hessian of the bulk-deformed potential vanishes")
        inv = det.invert()
        step1 = (h22 * f1 - h12 * f2) * inv
        step2 = (h11 * f2 - h12 * f1) * inv
        z1, z2 = z1 - step1, z2 - step2
        size = min(step1.valuation, step2.valuation)
        if size >= goal:
            return z1, z2, it
        if size <= previous:
            raise NoProgress(f"Newton correction stalled at valuation {size}")
        previous = size
    raise NoProgress(f"Newton did not reach valuation {goal}")


def _same(a: NovikovScalar, b: NovikovScalar, goal: Fraction) -> bool:
    # terms from the goal upward carry truncation noise
    return a.truncate(goal).approx_eq(b.truncate(goal), settings.ROOT_MERGE_TOL)


def continuum_points(m: ToricSurfaceModel, eps: RationalLike) -> List[ContinuumPoint]:
    """
    Solve grad (W^HV + T^eps z1) = 0 for 0 < eps < (a - k b / 2 - b) / 3.

    Seeds come from the two charts z2 = T^(b/2) (s + w): roots of the w-free
    part give the points labelled "fixed" (s = +1) and "pair" (s = -1), and
    leading roots at chart vertices with val w > 0 give the "bulk" point.
    Each seed is refined by Newton on the full potential; seeds that stall or
    leave their chart are discarded and repeated roots are merged into a
    multiplicity.

    Raises:
        OutOfRange: if eps is outside the open range.
    """
    p = continuum_params(m)
    eps = as_fraction(eps)
    _check_range(p, eps)
    order = m.trunc_order if m.trunc_order is not None else p.a + p.b
    # step noise from the truncation stays above this level
    goal = order - (p.a_eff - p.b) / 2
    W = bulk_deformed(m.with_trunc(order), eps)

    found: List[Tuple[_Branch, str, NovikovScalar, NovikovScalar]] = []
    for branch in _branches(W):
        chart = _branch_chart(W, branch)
        moving = chart[(1, 0)].valuation > 0
        seeds = [
            _Seed("pair" if moving else "fixed", z1, NovikovScalar.zero(order))
            for z1 in _axis_seeds(chart, order)
        ]
        seeds += [_Seed("bulk" if moving else "fixed", z1, w) for z1, w in _vertex_seeds(chart, order)]
        for seed in seeds:
            start = (seed.w + branch.s).shift(branch.half)
            try:
                z1, z2, steps = _newton(W, seed.z1, start, goal)
            except (NoProgress, SingularHessian, ArithmeticFailure) as exc:
                logger.debug("discarding %s seed on branch %+d: %s", seed.label, branch.sign, exc)
                continue
            w = z2.shift(-branch.half) - branch.s
            if w.valuation <= 0 or z1.is_zero():
                logger.debug("%s seed on branch %+d left its chart", seed.label, branch.sign)
                continue
            if any(b is branch and _same(z1, y1, goal) and _same(z2, y2, goal) for b, _, y1, y2 in found):
                continue
            logger.debug("%s point on branch %+d after %d Newton steps", seed.label, branch.sign, steps)
            found.append((branch, seed.label, z1, z2))

    counts: Counter = Counter()
    gradient = (log_partial(W, 1), log_partial(W, 2))
    residuals: Dict[tuple, Valuation] = {}
    for branch, label, z1, z2 in found:
        w = z2.shift(-branch.half) - branch.s
        key = (branch.sign, label, (z1.valuation, z2.valuation), (z1.valuation, w.valuation))
        counts[key] += 1
        g1, g2 = _evaluate_all(gradient, (z1, z2))
        residuals[key] = min(residuals.get(key, INF), g1.valuation, g2.valuation)
    rank = {"fixed": 0, "bulk": 1, "pair": 2}
    points = [
        ContinuumPoint(sign, label, val, local, n, residuals[(sign, label, val, local)])
        for (sign, label, val, local), n in counts.items()
    ]
    points.sort(key=lambda q: (rank.get(q.label, 3), q.valuation))
    logger.info(
        "eps = %s: %d critical points on %s",
        format_fraction(eps), sum(q.multiplicity for q in points), m.name,
    )
    return points


@dataclass(frozen=True)
class ContinuumTrajectory:
    params: ContinuumParams
    eps_values: Tuple[Fraction, ...]
    frames: Tuple[Tuple[ContinuumPoint, ...], ...]

    def track(self, label: str) -> List[Optional[Base]]:
        """Position of `label` in each frame, None where the solver did not find it."""
        return [
            next((q.valuation for q in frame if q.label == label), None) for frame in self.frames
        ]

    def matches_prediction(self) -> bool:
        """Every frame equals the closed-form positions at its eps."""
        return all(
            [q.key for q in frame] == [q.key for q in _predicted(self.params, e)]
            for e, frame in zip(self.eps_values, self.frames)
        )

    def is_linear(self) -> bool:
        """Each tracked position moves by a constant multiple of the eps step."""
        for label in ("fixed", "bulk", "pair"):
            positions = self.track(label)
            if None in positions:
                return False
            if len(positions) < 3:
                continue
            e0, x0 = self.eps_values[0], positions[0]
            e1, x1 = self.eps_values[1], positions[1]
            slope = ((x1[0] - x0[0]) / (e1 - e0), (x1[1] - x0[1]) / (e1 - e0))
            for e, x in zip(self.eps_values[2:], positions[2:]):
                if (x[0] - x0[0], x[1] - x0[1]) != (slope[0] * (e - e0), slope[1] * (e - e0)):
                    return False
        return True

    def limits(self) -> dict:
        """Positions approached at both ends of the eps range."""
        p = self.params
        return {
            "eps_to_zero": {
                "bulk": p.corner_point,
                "pair": p.fixed_point,
            },
            "eps_to_upper": {
                "bulk": p.merge_point,
                "pair": p.merge_point,
            },
        }

    def to_dict(self) -> dict:
        def pt(x: Base) -> list:
            return [format_fraction(x[0]), format_fraction(x[1])]

        return {
            "k": self.params.k,
            "a": format_fraction(self.params.a),
            "b": format_fraction(self.params.b),
            "range": ["0", format_fraction(self.params.upper)],
            "frames": [
                {"eps": format_fraction(e), "points": [q.to_dict() for q in frame]}
                for e, frame in zip(self.eps_values, self.frames)
            ],
            "linear": self.is_linear(),
            "matches_prediction": self.matches_prediction(),
            "limits": {
                end: {label: pt(x) for label, x in values.items()}
                for end, values in self.limits().items()
            },
        }


def continuum_scan(
    m: ToricSurfaceModel,
    eps_values: Optional[Sequence[RationalLike]] = None,
    steps: int = 5,
) -> ContinuumTrajectory:
    """
    Solved critical positions along a sweep of eps.

    Without `eps_values` the open range is sampled at `steps` evenly spaced
    interior points.

    Example:
        continuum_scan(continuum_model(1, 6, 1), steps=3).is_linear() -> True
    """
    p = continuum_params(m)
    if eps_values is None:
        values = [p.upper * Fraction(i, steps + 1) for i in range(1, steps + 1)]
    else:
        values = sorted({as_fraction(e) for e in eps_values})
    frames = tuple(tuple(continuum_points(m, e)) for e in values)
    logger.info("continuum scan of %s over %d values of eps", m.name, len(values))
    return ContinuumTrajectory(p, tuple(values), frames)
