from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Tuple

from app.core.config import settings
from app.core.errors import EmptySeries, ModelError, NonUnitSubstitution, ParseError
from app.core.novikov import (
    INF,
    NovikovScalar,
    RationalLike,
    RingFlag,
    Valuation,
    as_fraction,
)
from app.core.tropgeo.lattice import LatticePolygon

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# LAURENT MODULE
# Purpose: two-variable Laurent series with Novikov coefficients. Evaluation on
#          valuation fibers, leading parts, derivatives, substitutions and
#          Newton polytopes.
# Why: the potentials W^HV, W_min and their perturbations all live here, and
#      every solver step is phrased as an operation on them.
# -----------------------------------------------------------------------------


Exponent = Tuple[int, int]
Base = Tuple[Fraction, Fraction]

ORIGIN: Base = (Fraction(0), Fraction(0))


def as_base(base: Iterable[RationalLike]) -> Base:
    x, y = base
    return (as_fraction(x), as_fraction(y))


def pairing(base: Base, v: Exponent) -> Fraction:
    return base[0] * v[0] + base[1] * v[1]


def default_trunc_order(exponents: Iterable[RationalLike]) -> Fraction:
    """
    TRUNC_FACTOR times the largest absolute input exponent, floored at MIN_TRUNC_ORDER.

    Example:
        default_trunc_order(["3", "1/2"]) -> 12 with the default factor 4
    """
    largest = max((abs(as_fraction(e)) for e in exponents), default=Fraction(0))
    return max(settings.TRUNC_FACTOR * largest, Fraction(settings.MIN_TRUNC_ORDER))


@dataclass(frozen=True)
class FiberPoint:
    """A point z = (T^x u1, T^y u2) given by its valuation and its unit parts."""

    base: Base
    unit_part: Tuple[NovikovScalar, NovikovScalar]

    def __post_init__(self):
        for u in self.unit_part:
            if not u.ring_membership(RingFlag.LAMBDA_U):
                raise ModelError(f"fiber coordinate {u} is not a unit of valuation 0")

    @classmethod
    def from_units(
        cls, base: Iterable[RationalLike], units: Tuple[complex, complex], trunc_order
    ) -> "FiberPoint":
        return cls(
            as_base(base),
            (
                NovikovScalar.constant(units[0], trunc_order),
                NovikovScalar.constant(units[1], trunc_order),
            ),
        )

    def coords(self) -> Tuple[NovikovScalar, NovikovScalar]:
        return (
            self.unit_part[0].shift(self.base[0]),
            self.unit_part[1].shift(self.base[1]),
        )


@dataclass(frozen=True)
class LaurentSeries:
    """
    Finite map exponent -> nonzero NovikovScalar, sorted lexicographically.

    The support is exactly the key set; every coefficient carries `trunc_order`.
    """

    coeffs: Tuple[Tuple[Exponent, NovikovScalar], ...]
    trunc_order: Fraction

    # ---- construction -------------------------------------------------------

    @classmethod
    def from_dict(
        cls, mapping: Mapping[Exponent, NovikovScalar], trunc_order: RationalLike
    ) -> "LaurentSeries":
        trunc = as_fraction(trunc_order)
        items = []
        for v in sorted(mapping):
            c = mapping[v].truncate(trunc)
            if not c.is_zero():
                items.append(((int(v[0]), int(v[1])), c))
        return cls(tuple(items), trunc)

    @classmethod
    def from_monomials(
        cls,
        monomials: Iterable[Tuple[Exponent, RationalLike, complex]],
        trunc_order: RationalLike,
    ) -> "LaurentSeries":
        """
        Build a series from (exponent, valuation, coefficient) triples; repeated
        exponents are summed.

        Example:
            LaurentSeries.from_monomials([((1, 0), 0, 1), ((0, 1), 0, 1)], 4)  # z1 + z2
        """
        acc: Dict[Exponent, NovikovScalar] = {}
        for v, e, c in monomials:
            term = NovikovScalar.monomial(e, c, trunc_order)
            acc[v] = acc[v] + term if v in acc else term
        return cls.from_dict(acc, trunc_order)

    @classmethod
    def zero(cls, trunc_order: RationalLike) -> "LaurentSeries":
        return cls((), as_fraction(trunc_order))

    # ---- inspection ---------------------------------------------------------

    def as_dict(self) -> Dict[Exponent, NovikovScalar]:
        return dict(self.coeffs)

    def items(self) -> Iterator[Tuple[Exponent, NovikovScalar]]:
        return iter(self.coeffs)

    @property
    def support(self) -> list[Exponent]:
        return [v for v, _ in self.coeffs]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, v: Exponent) -> NovikovScalar:
        for key, c in self.coeffs:
            if key == tuple(v):
                return c
        return NovikovScalar.zero(self.trunc_order)

    def is_zero(self) -> bool:
        return not self.coeffs

    def level(self, v: Exponent, base: Base) -> Valuation:
        """val(coeff_v) + <base, v>, the tropical linear form of the monomial."""
        return self[v].valuation + pairing(base, v)

    def approx_eq(self, other: "LaurentSeries", tol: Optional[float] = None) -> bool:
        mine, theirs = self.as_dict(), other.as_dict()
        zero = NovikovScalar.zero(min(self.trunc_order, other.trunc_order))
        return all(
            mine.get(v, zero).approx_eq(theirs.get(v, zero), tol)
            for v in set(mine) | set(theirs)
        )

    # ---- algebra ------------------------------------------------------------

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        trunc = min(self.trunc_order, other.trunc_order)
        acc = self.as_dict()
        for v, c in other.coeffs:
            acc[v] = acc[v] + c if v in acc else c
        return LaurentSeries.from_dict(acc, trunc)

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(tuple((v, -c) for v, c in self.coeffs), self.trunc_order)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other) -> "LaurentSeries":
        if isinstance(other, (NovikovScalar, int, float, complex)):
            return LaurentSeries.from_dict(
                {v: c * other for v, c in self.coeffs}, self.trunc_order
            )
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        trunc = min(self.trunc_order, other.trunc_order)
        acc: Dict[Exponent, NovikovScalar] = {}
        for v1, c1 in self.coeffs:
            for v2, c2 in other.coeffs:
                v = (v1[0] + v2[0], v1[1] + v2[1])
                prod = c1 * c2
                acc[v] = acc[v] + prod if v in acc else prod
        return LaurentSeries.from_dict(acc, trunc)

    __rmul__ = __mul__

    def shift(self, exponent: RationalLike) -> "LaurentSeries":
        """Multiply every coefficient by T^exponent."""
        return LaurentSeries.from_dict(
            {v: c.shift(exponent) for v, c in self.coeffs}, self.trunc_order
        )

    def with_trunc(self, order: RationalLike) -> "LaurentSeries":
        return LaurentSeries.from_dict(self.as_dict(), order)

    def drop_from_level(self, base: Base) -> "LaurentSeries":
        """Remove monomials whose level at `base` is at or above trunc_order."""
        return LaurentSeries(
            tuple(
                (v, c)
                for v, c in self.coeffs
                if c.valuation + pairing(base, v) < self.trunc_order
            ),
            self.trunc_order,
        )

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"[{c}]*z^{v}" for v, c in self.coeffs)

    # ---- JSON ---------------------------------------------------------------

    def to_json_obj(self) -> list[dict[str, Any]]:
        return [{"exp": [v[0], v[1]], "coeff": c.to_text()} for v, c in self.coeffs]

    @classmethod
    def from_json_obj(cls, obj: Any, trunc_order: RationalLike) -> "LaurentSeries":
        if not isinstance(obj, list):
            raise ParseError("series must be a list of {exp, coeff} objects")
        acc: Dict[Exponent, NovikovScalar] = {}
        for i, entry in enumerate(obj):
            try:
                p, q = entry["exp"]
                v = (int(p), int(q))
                c = NovikovScalar.parse(str(entry["coeff"]), trunc_order)
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"bad series entry #{i}: {entry!r}") from e
            acc[v] = acc[v] + c if v in acc else c
        return cls.from_dict(acc, trunc_order)


# =========================
# Evaluation and restriction
# =========================
def restrict_at(W: LaurentSeries, base: Iterable[RationalLike]) -> LaurentSeries:
    """
    Series in unit variables: the coefficient at v becomes coeff_v * T^<base, v>.

    Example:
        restrict_at(z1 + z2 + T^a/(z1 z2), (a/3, a/3))  # every coefficient has val a/3
    """
    b = as_base(base)
    return LaurentSeries.from_dict(
        {v: c.shift(pairing(b, v)) for v, c in W.coeffs}, W.trunc_order
    )


def eval_units(
    W: LaurentSeries, units: Tuple[NovikovScalar, NovikovScalar]
) -> NovikovScalar:
    """Sum of coeff_v * u1^v1 * u2^v2 with the units substituted directly."""
    total = NovikovScalar.zero(W.trunc_order)
    powers: Dict[Tuple[int, int], NovikovScalar] = {}

    def power(axis: int, k: int) -> NovikovScalar:
        key = (axis, k)
        if key not in powers:
            powers[key] = units[axis] ** k
        return powers[key]

    for v, c in W.coeffs:
        total = total + c * power(0, v[0]) * power(1, v[1])
    return total


def evaluate(W: LaurentSeries, point: FiberPoint) -> NovikovScalar:
    """
    W(T^x u1, T^y u2) truncated at W.trunc_order.

    Example:
        evaluate(z1 + z2, FiberPoint.from_units((1, 1), (1, 1), 4)) -> 2T
    """
    return eval_units(restrict_at(W, point.base), point.unit_part)


def leading_part(
    W: LaurentSeries, base: Iterable[RationalLike]
) -> Tuple[LaurentSeries, Fraction]:
    """
    Monomials of W attaining the minimal level at `base`, and that level.

    Raises:
        EmptySeries: if W is zero.
    """
    if W.is_zero():
        raise EmptySeries("leading part of the zero series")
    b = as_base(base)
    levels = {v: c.valuation + pairing(b, v) for v, c in W.coeffs}
    delta = min(levels.values())
    return (
        LaurentSeries(tuple((v, c) for v, c in W.coeffs if levels[v] == delta), W.trunc_order),
        delta,
    )


def leading_coefficients(W: LaurentSeries, base: Iterable[RationalLike]) -> Tuple[Dict[Exponent, complex], Fraction]:
    """Complex leading coefficients of the leading part at `base`."""
    lead, delta = leading_part(W, base)
    return {v: c.leading_coefficient for v, c in lead.coeffs}, delta


# =========================
# Derivatives
# =========================
def log_partial(W: LaurentSeries, axis: int) -> LaurentSeries:
    """z_axis dW/dz_axis; `axis` is 1 or 2."""
    i = _axis_index(axis)
    return LaurentSeries.from_dict(
        {v: c * v[i] for v, c in W.coeffs if v[i] != 0}, W.trunc_order
    )


def partial(W: LaurentSeries, axis: int) -> LaurentSeries:
    """Plain dW/dz_axis; exponents drop by one along `axis`."""
    i = _axis_index(axis)
    acc = {}
    for v, c in W.coeffs:
        if v[i] == 0:
            continue
        w = (v[0] - 1, v[1]) if i == 0 else (v[0], v[1] - 1)
        acc[w] = c * v[i]
    return LaurentSeries.from_dict(acc, W.trunc_order)


def _axis_index(axis: int) -> int:
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    return axis - 1


# =========================
# Substitution
# =========================
def binomial(k: int, n: int) -> int:
    """k choose n for any integer k, so negative powers expand too."""
    result = Fraction(1)
    for i in range(n):
        result = result * (k - i) / (i + 1)
    return int(result)


def series_power(R: LaurentSeries, k: int, base: Base) -> LaurentSeries:
    """
    R^k; negative powers expand R = lead * (1 + f) as lead^k * sum binom(k, n) f^n.

    The lead is the unique monomial of minimal level at `base`; every term of
    f must have positive level there. Monomials whose level at `base` reaches
    trunc_order are dropped during the expansion.

    Raises:
        NonUnitSubstitution: if the lead is not unique or R is zero.
    """
    if k >= 0:
        result = LaurentSeries.from_monomials([((0, 0), 0, 1)], R.trunc_order)
        for _ in range(k):
            result = result * R
        return result

    if R.is_zero():
        raise NonUnitSubstitution("cannot invert the zero series")
    lead, delta = leading_part(R, base)
    if len(lead) != 1:
        raise NonUnitSubstitution(
            f"replacement has {len(lead)} leading monomials at {base}, expected one"
        )
    (m, cm), = lead.coeffs
    cm_inv = cm.invert()
    f = LaurentSeries.from_dict(
        {
            (v[0] - m[0], v[1] - m[1]): c * cm_inv
            for v, c in R.coeffs
            if v != m
        },
        R.trunc_order,
    )
    for v, c in f.coeffs:
        if c.valuation + pairing(base, v) <= 0:
            raise NonUnitSubstitution(
                f"replacement / leading monomial - 1 has level <= 0 at {base}"
            )

    unit_sum = LaurentSeries.from_monomials([((0, 0), 0, 1)], R.trunc_order)
    f_power = unit_sum
    n = 0
    while True:
        n += 1
        f_power = (f_power * f).drop_from_level(base)
        if f_power.is_zero():
            break
        unit_sum = unit_sum + f_power * binomial(k, n)

    lead_power = LaurentSeries.from_dict(
        {(m[0] * k, m[1] * k): cm_inv ** (-k)}, R.trunc_order
    )
    return (lead_power * unit_sum).drop_from_level(base)


def substitute(
    W: LaurentSeries,
    axis: int,
    replacement: LaurentSeries,
    base: Optional[Iterable[RationalLike]] = None,
) -> LaurentSeries:
    """
    Replace z_axis by `replacement` in W.

    Negative powers of the replacement are expanded around `base` (default the
    origin); the result drops monomials whose level at `base` reaches trunc_order.

    Example:
        substitute(z1, 1, z1 + T^-eps z1 z2) -> z1 + T^-eps z1 z2
    """
    i = _axis_index(axis)
    b = as_base(base) if base is not None else ORIGIN
    trunc = min(W.trunc_order, replacement.trunc_order)
    cache: Dict[int, LaurentSeries] = {}
    result = LaurentSeries.zero(trunc)
    for v, c in W.coeffs:
        k = v[i]
        if k not in cache:
            cache[k] = series_power(replacement, k, b)
        rest = (0, v[1]) if i == 0 else (v[0], 0)
        term = LaurentSeries.from_dict({rest: c}, trunc) * cache[k]
        result = result + term
    return result.drop_from_level(b)


def wall_cross(
    W: LaurentSeries,
    eps: RationalLike,
    axis: int = 1,
    inverse: bool = False,
    base: Optional[Iterable[RationalLike]] = None,
) -> LaurentSeries:
    """
    Blowup wall-crossing z_axis -> z_axis (1 + T^-eps z_other), or its inverse.

    The default expansion base puts the other coordinate at valuation 2 eps, where
    1 + T^-eps z_other is a unit.
    """
    eps = as_fraction(eps)
    i = _axis_index(axis)
    other = (0, 1) if i == 0 else (1, 0)
    own = (1, 0) if i == 0 else (0, 1)
    b = as_base(base) if base is not None else (
        (Fraction(0), 2 * eps) if i == 0 else (2 * eps, Fraction(0))
    )
    factor = LaurentSeries.from_monomials(
        [((0, 0), 0, 1), (other, -eps, 1)], W.trunc_order
    )
    if inverse:
        factor = series_power(factor, -1, b)
    z_own = LaurentSeries.from_monomials([(own, 0, 1)], W.trunc_order)
    return substitute(W, axis, z_own * factor, base=b)


# =========================
# Newton polytope
# =========================
def newton_polytope(W: LaurentSeries) -> LatticePolygon:
    """
    Convex hull of the support, counterclockwise.

    Raises:
        EmptySeries: if W is zero.
    """
    if W.is_zero():
        raise EmptySeries("Newton polytope of the zero series")
    return LatticePolygon.hull_of(W.support)


def min_level(W: LaurentSeries, base: Base) -> Valuation:
    return min((c.valuation + pairing(base, v) for v, c in W.coeffs), default=INF)
