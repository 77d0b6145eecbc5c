from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.core.errors import DuplicateEpsilon, ModelError, OrderingError, SizeBoundViolated
from app.core.laurent import Base, Exponent, LaurentSeries, default_trunc_order
from app.core.novikov import INF, RationalLike, Valuation, as_fraction, format_fraction
from app.core.tropgeo.lattice import (
    IntVec,
    area2,
    cross,
    det,
    dot,
    intersect_lines,
    inside_or_on,
    is_primitive,
    strictly_inside,
)

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# TORIC MODEL MODULE
# Purpose: fans, moment polytopes, Hori-Vafa potentials, toric and non-toric
#          blowups, W_min and the geometric filters on tropical vertices.
# Why: every solver run starts from a ToricSurfaceModel; blowups return new
#      models so a blowup log can be replayed step by step.
# -----------------------------------------------------------------------------


class BlowupKind:
    TORIC = "toric"
    NONTORIC = "nontoric"


@dataclass(frozen=True)
class BlowupRecord:
    kind: str
    corner: Optional[int] = None
    size: Optional[Fraction] = None
    ray: Optional[IntVec] = None
    sizes: Tuple[Fraction, ...] = ()
    forced: bool = False

    def describe(self) -> str:
        if self.kind == BlowupKind.TORIC:
            return f"toric blowup at corner {self.corner}, eta = {format_fraction(self.size)}"
        return "non-toric blowup on ray {} with eps = {}".format(
            self.ray, ", ".join(format_fraction(e) for e in self.sizes)
        )


@dataclass(frozen=True)
class ToricSurfaceModel:
    """
    Complete smooth toric surface with blowup points on its toric divisors.

    Rays are counterclockwise. `nontoric` maps a ray vector to the sizes of the
    blowup points on its divisor; the points sit near the corner shared with
    the previous ray. Indices are 0-based and corner j lies between rays[j]
    and rays[(j + 1) % N].
    """

    rays: Tuple[IntVec, ...]
    lambdas: Tuple[Fraction, ...]
    nontoric: Tuple[Tuple[IntVec, Tuple[Fraction, ...]], ...] = ()
    history: Tuple[BlowupRecord, ...] = ()
    trunc_order: Optional[Fraction] = None
    name: str = "model"

    def __post_init__(self):
        rays = tuple((int(r[0]), int(r[1])) for r in self.rays)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "lambdas", tuple(as_fraction(x) for x in self.lambdas))
        object.__setattr__(
            self,
            "nontoric",
            tuple(
                ((int(r[0]), int(r[1])), tuple(as_fraction(e) for e in sizes))
                for r, sizes in self.nontoric
                if sizes
            ),
        )
        if self.trunc_order is not None:
            object.__setattr__(self, "trunc_order", as_fraction(self.trunc_order))
        self._validate()

    def _validate(self) -> None:
        n = len(self.rays)
        if n < 3:
            raise ModelError(f"a complete fan needs at least 3 rays, got {n}")
        if len(self.lambdas) != n:
            raise ModelError(f"{n} rays but {len(self.lambdas)} lambdas")
        for r in self.rays:
            if not is_primitive(r):
                raise ModelError(f"ray {r} is not primitive")
        turning = 0.0
        for j in range(n):
            a, b = self.rays[j], self.rays[(j + 1) % n]
            if det(a, b) <= 0:
                raise ModelError(f"rays {a} and {b} are not in counterclockwise order")
            turning += math.atan2(det(a, b), dot(a, b))
        if round(turning / (2 * math.pi)) != 1:
            raise ModelError("rays wind around the origin more than once")
        corners = self.corners()
        for j in range(n):
            nu = self.rays[j]
            prev, nxt = corners[j - 1], corners[j]
            length = (nxt[0] - prev[0]) * nu[1] - (nxt[1] - prev[1]) * nu[0]
            if length <= 0:
                raise ModelError(f"facet of ray {nu} has non-positive length")
        ray_set = set(self.rays)
        seen = set()
        for r, sizes in self.nontoric:
            if r not in ray_set:
                raise ModelError(f"non-toric blowup on {r}, which is not a ray")
            if r in seen:
                raise ModelError(f"ray {r} listed twice in the non-toric log")
            seen.add(r)
            if any(e <= 0 for e in sizes):
                raise ModelError(f"non-toric sizes on {r} must be positive")
            if len(set(sizes)) != len(sizes):
                raise DuplicateEpsilon(f"repeated size on ray {r}: {sizes}")
        if self.trunc_order is not None:
            # a monomial at or above the truncation would silently vanish from W_min
            for v, lam, _ in _wmin_monomials(self):
                if lam >= self.trunc_order:
                    raise ModelError(
                        f"trunc_order {format_fraction(self.trunc_order)} drops the term "
                        f"T^{format_fraction(lam)} z^{v}; raise it above every exponent"
                    )

    # ---- basic data ---------------------------------------------------------

    @property
    def N(self) -> int:
        return len(self.rays)

    def ray_index(self, ray: IntVec) -> int:
        try:
            return self.rays.index(tuple(ray))
        except ValueError:
            raise ModelError(f"{tuple(ray)} is not a ray of the fan") from None

    def nontoric_sizes(self, ray: IntVec) -> Tuple[Fraction, ...]:
        return dict(self.nontoric).get(tuple(ray), ())

    def corners(self) -> List[Tuple[Fraction, Fraction]]:
        """Vertex j of the moment polytope: facets of rays j and j+1 meet there."""
        n = len(self.rays)
        return [
            intersect_lines(
                self.rays[j], -self.lambdas[j], self.rays[(j + 1) % n], -self.lambdas[(j + 1) % n]
            )
            for j in range(n)
        ]

    def input_exponents(self) -> List[Fraction]:
        values = list(self.lambdas)
        for _, sizes in self.nontoric:
            values.extend(sizes)
        return values

    def effective_trunc_order(self) -> Fraction:
        if self.trunc_order is not None:
            return self.trunc_order
        return default_trunc_order(v for _, v, _ in _wmin_monomials(self))

    def with_trunc(self, order: Optional[RationalLike]) -> "ToricSurfaceModel":
        return replace(self, trunc_order=None if order is None else as_fraction(order))


# =========================
# Moment polytope and charts
# =========================
@dataclass(frozen=True)
class MomentPolytope:
    vertices: Tuple[Tuple[Fraction, Fraction], ...]

    @property
    def area(self) -> Fraction:
        return Fraction(area2(self.vertices)) / 2

    def strictly_contains(self, x: Base) -> bool:
        return strictly_inside(x, self.vertices)

    def contains(self, x: Base) -> bool:
        return inside_or_on(x, self.vertices)


def moment_polytope(m: ToricSurfaceModel) -> MomentPolytope:
    """{x : <x, nu_i> >= -lambda_i} by its counterclockwise corners."""
    return MomentPolytope(tuple(m.corners()))


@dataclass(frozen=True)
class CornerChart:
    """
    Unimodular chart at corner j: x' = (<x, nu_j> + lambda_j, <x, nu_j+1> + lambda_j+1).

    In these coordinates nu_j, nu_j+1 become the standard basis and the two
    facets through the corner become the coordinate axes.
    """

    corner: int
    nu1: IntVec
    nu2: IntVec
    lam1: Fraction
    lam2: Fraction

    @property
    def determinant(self) -> int:
        return det(self.nu1, self.nu2)

    def to_chart(self, x: Base) -> Base:
        return (dot(x, self.nu1) + self.lam1, dot(x, self.nu2) + self.lam2)

    def from_chart(self, xp: Base) -> Base:
        return intersect_lines(self.nu1, xp[0] - self.lam1, self.nu2, xp[1] - self.lam2)

    def exponent_to_chart(self, v: Exponent) -> Exponent:
        # v' solves <v', (<x,nu1>, <x,nu2>)> = <v, x>, i.e. v = v'_1 nu1 + v'_2 nu2
        d = self.determinant
        a = det(v, self.nu2)
        b = det(self.nu1, v)
        if a % d or b % d:
            raise ModelError(f"exponent {v} is not integral in the chart of corner {self.corner}")
        return (a // d, b // d)

    def series_to_chart(self, W: LaurentSeries) -> LaurentSeries:
        """Rewrite W in chart monomials; coefficients pick up T^-<v', lambda>."""
        acc = {}
        for v, c in W.coeffs:
            vp = self.exponent_to_chart(v)
            acc[vp] = c.shift(-(vp[0] * self.lam1 + vp[1] * self.lam2))
        return LaurentSeries.from_dict(acc, W.trunc_order)


def corner_chart(m: ToricSurfaceModel, j: int) -> CornerChart:
    n = m.N
    if not 0 <= j < n:
        raise ModelError(f"corner index {j} out of range for {n} rays")
    return CornerChart(j, m.rays[j], m.rays[(j + 1) % n], m.lambdas[j], m.lambdas[(j + 1) % n])


@dataclass(frozen=True)
class GeometricRegion:
    star: Tuple[IntVec, ...]
    polytope: MomentPolytope


def geometric_region(m: ToricSurfaceModel) -> GeometricRegion:
    return GeometricRegion(m.rays, moment_polytope(m))


# =========================
# Potentials
# =========================
def _elementary_subsets(sizes: Sequence[Fraction], k: int) -> Iterable[Fraction]:
    for subset in combinations(sizes, k):
        yield sum(subset, Fraction(0))


def _wmin_monomials(m: ToricSurfaceModel) -> List[Tuple[Exponent, Fraction, int]]:
    monomials = [(nu, lam, 1) for nu, lam in zip(m.rays, m.lambdas)]
    n = m.N
    for ray, sizes in m.nontoric:
        i = m.ray_index(ray)
        prev_ray, prev_lam = m.rays[(i - 1) % n], m.lambdas[(i - 1) % n]
        lam = m.lambdas[i]
        for k in range(1, len(sizes) + 1):
            v = (prev_ray[0] + k * ray[0], prev_ray[1] + k * ray[1])
            for s in _elementary_subsets(sizes, k):
                monomials.append((v, prev_lam + k * lam - s, 1))
    return monomials


def hori_vafa(m: ToricSurfaceModel) -> LaurentSeries:
    """
    Sum of T^lambda_i z^nu_i over the current rays.

    Example:
        hori_vafa(P2 with a) -> z1 + z2 + T^a z1^-1 z2^-1
    """
    return LaurentSeries.from_monomials(
        [(nu, lam, 1) for nu, lam in zip(m.rays, m.lambdas)], m.effective_trunc_order()
    )


def w_min(m: ToricSurfaceModel) -> LaurentSeries:
    """
    Hori-Vafa part plus the basic broken disk terms.

    For l points of sizes eps_1..eps_l on the divisor of ray i, the coefficient
    at nu_{i-1} + k nu_i is e_k(T^-eps_1, ..., T^-eps_l) T^(lambda_{i-1} + k lambda_i).
    """
    return LaurentSeries.from_monomials(_wmin_monomials(m), m.effective_trunc_order())


def local_model(
    eps: Sequence[RationalLike], trunc_order: Optional[RationalLike] = None
) -> LaurentSeries:
    """z2 + z1 (1 + T^-eps_1 z2) ... (1 + T^-eps_l z2)."""
    sizes = [as_fraction(e) for e in eps]
    monomials: List[Tuple[Exponent, Fraction, int]] = [((0, 1), Fraction(0), 1), ((1, 0), Fraction(0), 1)]
    for k in range(1, len(sizes) + 1):
        for s in _elementary_subsets(sizes, k):
            monomials.append(((1, k), -s, 1))
    trunc = trunc_order if trunc_order is not None else default_trunc_order(
        [sum(sizes, Fraction(0))] + sizes
    )
    return LaurentSeries.from_monomials(monomials, trunc)


def cohomology_rank(m: ToricSurfaceModel) -> int:
    return m.N + sum(len(sizes) for _, sizes in m.nontoric)


# =========================
# Blowups
# =========================
def blowup_size_bound(m: ToricSurfaceModel, corner: int = 0) -> Valuation:
    """
    r = min over geometric critical points of max(x', y') in the chart of `corner`.

    Returns INF when the model has no geometric critical points.
    """
    # the solver imports this module
    from app.core.critsolve.pipeline import find_all_geometric

    chart = corner_chart(m, corner)
    result = find_all_geometric(m)
    values = [max(chart.to_chart(p.valuation)) for p in result.points if p.geometric]
    return min(values, default=INF)


def toric_blowup(
    m: ToricSurfaceModel, corner: int, eta: RationalLike, force: bool = False
) -> ToricSurfaceModel:
    """
    Insert nu_j + nu_j+1 with lambda' = lambda_j + lambda_j+1 - eta.

    In the chart of the corner the new term is T^-eta z1 z2.

    Raises:
        SizeBoundViolated: if eta >= blowup_size_bound(m, corner) and not `force`.
        OrderingError: if the next ray carries non-toric blowup points.
    """
    eta = as_fraction(eta)
    chart = corner_chart(m, corner)
    if eta <= 0:
        raise ModelError(f"toric blowup size must be positive, got {eta}")
    if chart.determinant != 1:
        raise ModelError(f"corner {corner} is not smooth (det = {chart.determinant})")
    if m.nontoric_sizes(chart.nu2):
        raise OrderingError(
            f"ray {chart.nu2} carries non-toric points near corner {corner}; "
            "blow up the corner before adding them"
        )
    bound = blowup_size_bound(m, corner)
    if eta >= bound:
        if not force:
            raise SizeBoundViolated(eta, bound)
        logger.warning("forcing toric blowup with eta=%s >= r=%s", eta, bound)

    new_ray = (chart.nu1[0] + chart.nu2[0], chart.nu1[1] + chart.nu2[1])
    rays = list(m.rays)
    lambdas = list(m.lambdas)
    rays.insert(corner + 1, new_ray)
    lambdas.insert(corner + 1, chart.lam1 + chart.lam2 - eta)
    record = BlowupRecord(BlowupKind.TORIC, corner=corner, size=eta, forced=eta >= bound)
    logger.info("%s: %s", m.name, record.describe())
    return replace(
        m, rays=tuple(rays), lambdas=tuple(lambdas), history=m.history + (record,)
    )


def nontoric_blowup(
    m: ToricSurfaceModel,
    ray_index: int,
    sizes: Sequence[RationalLike],
    check_smallness: bool = True,
) -> ToricSurfaceModel:
    """
    Add len(sizes) blowup points on the divisor of rays[ray_index].

    Raises:
        DuplicateEpsilon: if a size repeats (also against points already on the ray).
    """
    eps = tuple(as_fraction(e) for e in sizes)
    if not eps:
        return m
    if not 0 <= ray_index < m.N:
        raise ModelError(f"ray index {ray_index} out of range for {m.N} rays")
    if any(e <= 0 for e in eps):
        raise ModelError(f"non-toric sizes must be positive, got {eps}")
    ray = m.rays[ray_index]
    existing = m.nontoric_sizes(ray)
    combined = existing + eps
    if len(set(combined)) != len(combined):
        raise DuplicateEpsilon(f"sizes on ray {ray} must be pairwise distinct: {combined}")

    if check_smallness:
        bound = blowup_size_bound(m, (ray_index - 1) % m.N)
        large = [e for e in eps if e >= bound]
        if large:
            logger.warning(
                "non-toric sizes %s on ray %s are not below r=%s of the adjacent corner",
                [format_fraction(e) for e in large],
                ray,
                bound,
            )

    log = dict(m.nontoric)
    log[ray] = combined
    nontoric = tuple((r, log[r]) for r in m.rays if r in log)
    record = BlowupRecord(BlowupKind.NONTORIC, ray=ray, sizes=eps)
    logger.info("%s: %s", m.name, record.describe())
    return replace(m, nontoric=nontoric, history=m.history + (record,))


# =========================
# Geometric filters
# =========================
def geometric_filter_toric(nu_i: IntVec, nu_j: IntVec, nu_k: IntVec) -> bool:
    """
    det(nu_i - nu_j, nu_k - nu_j) <= 0 for rays in counterclockwise fan order.

    Raises:
        ValueError: if two of the rays coincide.
    """
    if len({tuple(nu_i), tuple(nu_j), tuple(nu_k)}) < 3:
        raise ValueError("the toric filter needs three distinct rays")
    return cross(nu_j, nu_i, nu_k) <= 0


def broken_disk_classes(m: ToricSurfaceModel) -> Dict[Exponent, Tuple[int, int]]:
    """Exponent nu_{i-1} + k nu_i -> (ray index i, k) for every blowup point count k."""
    classes = {}
    n = m.N
    for ray, sizes in m.nontoric:
        i = m.ray_index(ray)
        prev = m.rays[(i - 1) % n]
        for k in range(1, len(sizes) + 1):
            classes[(prev[0] + k * ray[0], prev[1] + k * ray[1])] = (i, k)
    return classes


def geometric_filter_nontoric(m: ToricSurfaceModel, minimizers: Iterable[Exponent]) -> bool:
    """
    True iff every minimizer lies in {nu_{i-1}, nu_i} together with the broken
    disk classes of one ray i.
    """
    mins = {tuple(v) for v in minimizers}
    classes = broken_disk_classes(m)
    n = m.N
    for ray, _ in m.nontoric:
        i = m.ray_index(ray)
        own = {v for v, (r, _) in classes.items() if r == i}
        allowed = {m.rays[(i - 1) % n], ray} | own
        if mins & own and mins <= allowed:
            return True
    return False


@dataclass(frozen=True)
class VertexClass:
    coords: Base
    minimizers: Tuple[Exponent, ...]
    kind: str
    in_polytope: bool
    filter_ok: bool

    @property
    def geometric(self) -> bool:
        return self.in_polytope and self.filter_ok


def _toric_filter_all(m: ToricSurfaceModel, ray_minimizers: List[IntVec]) -> bool:
    ordered = sorted(ray_minimizers, key=m.ray_index)
    if len(ordered) < 3:
        return True
    n = len(ordered)
    return all(
        geometric_filter_toric(ordered[t], ordered[(t + 1) % n], ordered[(t + 2) % n])
        for t in range(n)
    )


def classify_vertex(
    m: ToricSurfaceModel, coords: Base, minimizers: Iterable[Exponent]
) -> VertexClass:
    """
    Minimizer classes at a tropical vertex of W_min and whether it is geometric:
    inside the moment polytope and passing the toric or non-toric filter.
    """
    mins = tuple(sorted(tuple(v) for v in minimizers))
    ray_set = set(m.rays)
    non_rays = [v for v in mins if v not in ray_set]
    if non_rays:
        kind = "nontoric"
        filter_ok = geometric_filter_nontoric(m, mins)
    else:
        kind = "toric"
        filter_ok = _toric_filter_all(m, list(mins))
    in_polytope = moment_polytope(m).strictly_contains(coords)
    return VertexClass(tuple(coords), mins, kind, in_polytope, filter_ok)
