from __future__ import annotations

import math
import re
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Tuple, Union

from app.core.config import settings
from app.core.errors import ModelError, ParseError, ZeroInverse


# -----------------------------------------------------------------------------
# NOVIKOV MODULE
# Purpose: truncated formal sums  sum c_i T^{e_i}  with exact rational exponents
#          and complex coefficients, plus the subring tests for L0, L+ and LU.
# Why: every valuation comparison downstream must be exact, so exponents are
#      Fractions; coefficients are floats pruned with the zero tolerance.
# -----------------------------------------------------------------------------


# Valuation of the zero scalar
INF = math.inf

Valuation = Union[Fraction, float]
RationalLike = Union[Fraction, int, str]
Term = Tuple[Fraction, complex]

_zero_tol: ContextVar[float] = ContextVar("zero_tol", default=settings.ZERO_TOL)


def zero_tolerance() -> float:
    """Current coefficient zero tolerance."""
    return _zero_tol.get()


@contextmanager
def tolerance(tol: float) -> Iterator[float]:
    """
    Temporarily override the zero tolerance for the current context.

    Example:
        with tolerance(1e-12):
            s = a * b
    """
    if not (0 < tol <= 1e-3):
        raise ModelError(f"tolerance {tol} outside (0, 1e-3]")
    token = _zero_tol.set(tol)
    try:
        yield tol
    finally:
        _zero_tol.reset(token)


def as_fraction(value: RationalLike | float) -> Fraction:
    """Convert ints, Fractions, rational strings ("3/10") and decimal floats to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise ModelError(f"not a rational number: {value!r}") from e


class RingFlag(str, Enum):
    LAMBDA = "Lambda"
    LAMBDA0 = "Lambda0"
    LAMBDA_PLUS = "LambdaPlus"
    LAMBDA_U = "LambdaU"


@dataclass(frozen=True)
class NovikovScalar:
    """
    Element of the Novikov field truncated at `trunc_order`.

    `terms` is strictly increasing in the exponent, every exponent is below
    `trunc_order` and no stored coefficient is below the zero tolerance.
    Build instances through `from_terms` (or the helpers) so these hold.
    """

    terms: Tuple[Term, ...]
    trunc_order: Fraction
    truncated: bool = False

    # ---- construction -------------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        pairs: Iterable[Tuple[RationalLike, complex]],
        trunc_order: RationalLike,
        truncated: bool = False,
    ) -> "NovikovScalar":
        trunc = as_fraction(trunc_order)
        tol = zero_tolerance()
        acc: dict[Fraction, complex] = {}
        for exponent, coeff in pairs:
            e = as_fraction(exponent)
            if e >= trunc:
                if abs(coeff) > tol:
                    truncated = True
                continue
            acc[e] = acc.get(e, 0j) + complex(coeff)
        terms = tuple((e, acc[e]) for e in sorted(acc) if abs(acc[e]) > tol)
        return cls(terms, trunc, truncated)

    @classmethod
    def zero(cls, trunc_order: RationalLike) -> "NovikovScalar":
        return cls((), as_fraction(trunc_order))

    @classmethod
    def constant(cls, coeff: complex, trunc_order: RationalLike) -> "NovikovScalar":
        return cls.from_terms([(0, coeff)], trunc_order)

    @classmethod
    def monomial(
        cls, exponent: RationalLike, coeff: complex, trunc_order: RationalLike
    ) -> "NovikovScalar":
        return cls.from_terms([(exponent, coeff)], trunc_order)

    # ---- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def valuation(self) -> Valuation:
        return self.terms[0][0] if self.terms else INF

    @property
    def leading_coefficient(self) -> complex:
        return self.terms[0][1] if self.terms else 0j

    def coefficient_at(self, exponent: RationalLike) -> complex:
        e = as_fraction(exponent)
        for exp, coeff in self.terms:
            if exp == e:
                return coeff
        return 0j

    def leading_term(self) -> "NovikovScalar":
        return NovikovScalar(self.terms[:1], self.trunc_order, self.truncated)

    def exponents(self) -> list[Fraction]:
        return [e for e, _ in self.terms]

    def ring_membership(self, flag: RingFlag) -> bool:
        if flag == RingFlag.LAMBDA:
            return True
        v = self.valuation
        if flag == RingFlag.LAMBDA0:
            return v >= 0
        if flag == RingFlag.LAMBDA_PLUS:
            return v > 0
        return v == 0 and abs(self.leading_coefficient) > zero_tolerance()

    def approx_eq(self, other: "NovikovScalar", tol: float | None = None) -> bool:
        """Term-for-term comparison below the common truncation order."""
        tol = zero_tolerance() * 100 if tol is None else tol
        order = min(self.trunc_order, other.trunc_order)
        mine = {e: c for e, c in self.terms if e < order}
        theirs = {e: c for e, c in other.terms if e < order}
        for e in set(mine) | set(theirs):
            a, b = mine.get(e, 0j), theirs.get(e, 0j)
            if abs(a - b) > tol * max(1.0, abs(a), abs(b)):
                return False
        return True

    # ---- truncation ---------------------------------------------------------

    def truncate(self, order: RationalLike) -> "NovikovScalar":
        order = as_fraction(order)
        if order >= self.trunc_order:
            return NovikovScalar(self.terms, order, self.truncated)
        kept = tuple((e, c) for e, c in self.terms if e < order)
        return NovikovScalar(kept, order, self.truncated or len(kept) < len(self.terms))

    def shift(self, exponent: RationalLike) -> "NovikovScalar":
        """Multiply by T^exponent, keeping the absolute truncation order."""
        e0 = as_fraction(exponent)
        return NovikovScalar.from_terms(
            ((e + e0, c) for e, c in self.terms), self.trunc_order, self.truncated
        )

    # ---- field operations ---------------------------------------------------

    def _coerce(self, other) -> "NovikovScalar":
        if isinstance(other, NovikovScalar):
            return other
        if isinstance(other, (int, float, complex)):
            return NovikovScalar.constant(other, self.trunc_order)
        return NotImplemented

    def __add__(self, other) -> "NovikovScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return NovikovScalar.from_terms(
            self.terms + other.terms,
            min(self.trunc_order, other.trunc_order),
            self.truncated or other.truncated,
        )

    __radd__ = __add__

    def __neg__(self) -> "NovikovScalar":
        return NovikovScalar(
            tuple((e, -c) for e, c in self.terms), self.trunc_order, self.truncated
        )

    def __sub__(self, other) -> "NovikovScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "NovikovScalar":
        return (-self) + other

    def __mul__(self, other) -> "NovikovScalar":
        if isinstance(other, (int, float, complex)):
            return NovikovScalar.from_terms(
                ((e, c * other) for e, c in self.terms),
                self.trunc_order,
                self.truncated,
            )
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        trunc = min(self.trunc_order, other.trunc_order)
        products = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if e >= trunc:
                    # terms are sorted, the rest of this row is out of range
                    break
                products.append((e, c1 * c2))
        return NovikovScalar.from_terms(
            products, trunc, self.truncated or other.truncated
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "NovikovScalar":
        if isinstance(other, (int, float, complex)):
            if abs(other) <= zero_tolerance():
                raise ZeroInverse("division by a zero constant")
            return self * (1 / other)
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        return self * other.invert()

    def invert(self) -> "NovikovScalar":
        """
        Inverse through the geometric series.

        Writing s = c T^e (1 + r) with val(r) > 0, returns c^-1 T^-e sum (-r)^n
        with every term below the truncation order.

        Example:
            (1 - T^(1/2)).invert() -> 1 + T^(1/2) + T + ...
        """
        if self.is_zero():
            raise ZeroInverse("cannot invert the zero scalar")
        e0, c0 = self.terms[0]
        working = self.trunc_order + e0
        rest = NovikovScalar.from_terms(
            ((e - e0, -c / c0) for e, c in self.terms[1:]), working
        )
        result = NovikovScalar.constant(1, working)
        power = result
        while True:
            power = power * rest
            if power.is_zero():
                break
            result = result + power
        inverse = NovikovScalar.from_terms(
            ((e - e0, c / c0) for e, c in result.terms), self.trunc_order, self.truncated
        )
        return inverse

    def __pow__(self, k: int) -> "NovikovScalar":
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.invert() ** (-k)
        result = NovikovScalar.constant(1, self.trunc_order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # ---- text format --------------------------------------------------------

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(
            f"({format_complex(c)})*T^({format_fraction(e)})" for e, c in self.terms
        )

    def __str__(self) -> str:
        return self.to_text()

    @classmethod
    def parse(cls, text: str, trunc_order: RationalLike) -> "NovikovScalar":
        """
        Parse the text format written by `to_text`.

        Example:
            NovikovScalar.parse("(3+0i)*T^(1/2) + (1+0i)*T^(2)", 8)
        """
        stripped = text.strip()
        if stripped in ("", "0"):
            return cls.zero(trunc_order)
        pairs = []
        offset = 0
        for chunk in re.split(r"(\s+\+\s+)", stripped):
            if re.fullmatch(r"\s+\+\s+", chunk):
                offset += len(chunk)
                continue
            match = _TERM_RE.fullmatch(chunk.strip())
            if match is None:
                raise ParseError(
                    f"cannot parse Novikov term {chunk!r}", line=1, column=offset + 1
                )
            pairs.append(_term_from_match(match))
            offset += len(chunk)
        return cls.from_terms(pairs, trunc_order)


_FLOAT = r"(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TERM_RE = re.compile(
    rf"\(?\s*(?P<re>[-+]?{_FLOAT})(?:(?P<im>[-+]{_FLOAT})i)?\s*\)?"
    rf"(?:\s*\*\s*T\^\(\s*(?P<num>[-+]?\d+)(?:\s*/\s*(?P<den>\d+))?\s*\))?"
)


def _term_from_match(match: re.Match) -> Term:
    coeff = complex(float(match["re"]), float(match["im"] or 0.0))
    if match["num"] is None:
        return Fraction(0), coeff
    return Fraction(int(match["num"]), int(match["den"] or 1)), coeff


def format_fraction(value: Fraction) -> str:
    value = as_fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_complex(value: complex) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{value.real + 0.0:.17g}{value.imag + 0.0:+.17g}i"


# ---- module-level operations -------------------------------------------------


def val(s: NovikovScalar) -> Valuation:
    return s.valuation


def invert(s: NovikovScalar) -> NovikovScalar:
    return s.invert()


def ring_membership(s: NovikovScalar, flag: RingFlag) -> bool:
    return s.ring_membership(flag)


def min_valuation(values: Iterable[Valuation]) -> Valuation:
    return min(values, default=INF)
