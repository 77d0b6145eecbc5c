from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import DegenerateConfiguration
from app.core.laurent import Base, Exponent, LaurentSeries, as_base, leading_coefficients

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# LEADING MODULE
# Purpose: solve the leading Laurent system at a tropical vertex:
#          z1 dW0/dz1 = z2 dW0/dz2 = 0 for (u1, u2) in (C*)^2.
# Why: every convenient critical point starts from one of these roots; the
#      count with multiplicity is the 2 x area of the dual cell.
# -----------------------------------------------------------------------------


Poly = Dict[Tuple[int, int], complex]


@dataclass(frozen=True)
class LeadingSystem:
    """Leading monomials of W at `base` with their complex leading coefficients."""

    base: Base
    delta: Fraction
    coeffs: Tuple[Tuple[Exponent, complex], ...]

    @classmethod
    def from_series(cls, W: LaurentSeries, base: Iterable) -> "LeadingSystem":
        b = as_base(base)
        coeffs, delta = leading_coefficients(W, b)
        return cls(b, delta, tuple(sorted(coeffs.items())))

    @property
    def monomials(self) -> List[Exponent]:
        return [v for v, _ in self.coeffs]

    def log_gradient(self, u1: complex, u2: complex) -> Tuple[complex, complex]:
        p1 = sum(v[0] * c * u1 ** v[0] * u2 ** v[1] for v, c in self.coeffs)
        p2 = sum(v[1] * c * u1 ** v[0] * u2 ** v[1] for v, c in self.coeffs)
        return p1, p2

    def log_jacobian(self, u1: complex, u2: complex) -> np.ndarray:
        """d(z_i dW0/dz_i)/du_j at (u1, u2)."""
        J = np.zeros((2, 2), dtype=complex)
        u = (u1, u2)
        for v, c in self.coeffs:
            mono = c * u1 ** v[0] * u2 ** v[1]
            for i in range(2):
                for j in range(2):
                    J[i, j] += v[i] * v[j] * mono / u[j]
        return J

    def plain_hessian(self, u1: complex, u2: complex) -> np.ndarray:
        H = np.zeros((2, 2), dtype=complex)
        for v, c in self.coeffs:
            mono = c * u1 ** v[0] * u2 ** v[1]
            H[0, 0] += v[0] * (v[0] - 1) * mono / (u1 * u1)
            H[1, 1] += v[1] * (v[1] - 1) * mono / (u2 * u2)
            H[0, 1] += v[0] * v[1] * mono / (u1 * u2)
        H[1, 0] = H[0, 1]
        return H


@dataclass(frozen=True)
class LeadingRoot:
    units: Tuple[complex, complex]
    multiplicity: int
    jacobian_det: complex


# =========================
# Polynomial helpers
# =========================
def _cleared(system: LeadingSystem, axis: int) -> Poly:
    """Log partial along `axis` divided by its monomial content."""
    terms = {v: v[axis] * c for v, c in system.coeffs if v[axis] != 0}
    if not terms:
        return {}
    mp = min(v[0] for v in terms)
    mq = min(v[1] for v in terms)
    return {(v[0] - mp, v[1] - mq): c for v, c in terms.items()}


def _swap(poly: Poly) -> Poly:
    return {(q, p): c for (p, q), c in poly.items()}


def _deg(poly: Poly, axis: int) -> int:
    return max((v[axis] for v in poly), default=0)


def _coeffs_in_u1(poly: Poly, t: complex) -> np.ndarray:
    """Coefficients (highest degree first) of poly(., t) as a polynomial in u1."""
    m = _deg(poly, 0)
    out = np.zeros(m + 1, dtype=complex)
    for (p, q), c in poly.items():
        out[m - p] += c * t ** q
    return out


def _eval(poly: Poly, u1: complex, u2: complex) -> complex:
    return sum(c * u1 ** p * u2 ** q for (p, q), c in poly.items())


def _magnitude(poly: Poly, u1: complex, u2: complex) -> float:
    return sum(abs(c) * abs(u1) ** p * abs(u2) ** q for (p, q), c in poly.items())


def _sylvester_det(f: Poly, g: Poly, t: complex) -> complex:
    a = _coeffs_in_u1(f, t)
    b = _coeffs_in_u1(g, t)
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    S = np.zeros((size, size), dtype=complex)
    for r in range(n):
        S[r, r : r + m + 1] = a
    for r in range(m):
        S[n + r, r : r + n + 1] = b
    return complex(np.linalg.det(S))


def resultant_coefficients(f: Poly, g: Poly) -> np.ndarray:
    """
    Res_u1(f, g) as a polynomial in u2, lowest degree first.

    Sampled at roots of unity and interpolated with an FFT.
    """
    m, n = _deg(f, 0), _deg(g, 0)
    degree = m * _deg(g, 1) + n * _deg(f, 1)
    count = degree + 1
    nodes = np.exp(2j * np.pi * np.arange(count) / count)
    values = np.array([_sylvester_det(f, g, t) for t in nodes])
    return np.fft.fft(values) / count


def _cluster(roots: Iterable[complex]) -> List[Tuple[complex, int]]:
    clusters: List[List[complex]] = []
    for r in roots:
        for group in clusters:
            center = np.mean(group)
            if abs(r - center) <= settings.ROOT_MERGE_TOL * max(1.0, abs(center)):
                group.append(r)
                break
        else:
            clusters.append([r])
    return [(complex(np.mean(g)), len(g)) for g in clusters]


def _polish(system: LeadingSystem, u1: complex, u2: complex) -> Tuple[complex, complex]:
    for _ in range(settings.ROOT_POLISH_STEPS):
        J = system.log_jacobian(u1, u2)
        if abs(np.linalg.det(J)) <= settings.ROOT_MERGE_TOL * max(1.0, np.abs(J).max() ** 2):
            break
        p = np.array(system.log_gradient(u1, u2))
        step = np.linalg.solve(J, p)
        u1, u2 = u1 - step[0], u2 - step[1]
    return complex(u1), complex(u2)


# =========================
# Solver
# =========================
def solve_leading(system: LeadingSystem) -> List[LeadingRoot]:
    """
    All solutions in (C*)^2 of the leading log-gradient system.

    The two log partials are cleared to polynomials, u1 is eliminated by a
    resultant, and the u2 roots come from the companion matrix (np.roots).

    Raises:
        DegenerateConfiguration: if the solution set is positive dimensional.

    Example:
        solve_leading(LeadingSystem.from_series(W_p2, (a/3, a/3)))  # three roots (z, z), z^3 = 1
    """
    if len(system.coeffs) < 2:
        logger.debug("single leading monomial at %s: no critical points", system.base)
        return []

    f = _cleared(system, 0)
    g = _cleared(system, 1)
    if not f or not g:
        other = g or f
        if len(other) >= 2:
            raise DegenerateConfiguration(
                f"a log partial vanishes identically at {system.base}; solutions form a curve"
            )
        return []

    swapped = False
    if _deg(f, 0) == 0 and _deg(g, 0) == 0:
        f, g, swapped = _swap(f), _swap(g), True
        if _deg(f, 0) == 0 and _deg(g, 0) == 0:
            return []

    res = resultant_coefficients(f, g)
    scale = np.abs(res).max() if res.size else 0.0
    if scale <= settings.ZERO_TOL:
        raise DegenerateConfiguration(
            f"resultant vanishes identically at {system.base}; leading system is not generic"
        )
    keep = np.abs(res) > 1e-10 * scale
    low, high = int(np.argmax(keep)), len(res) - 1 - int(np.argmax(keep[::-1]))
    trimmed = res[low : high + 1]
    if len(trimmed) <= 1:
        return []
    second_roots = np.roots(trimmed[::-1])

    found: List[Tuple[complex, complex, int]] = []
    for center, mu in _cluster(second_roots):
        if abs(center) <= settings.ROOT_MERGE_TOL:
            continue
        candidates: List[complex] = []
        for source, check in ((f, g), (g, f)):
            coeffs = _coeffs_in_u1(source, center)
            nz = np.abs(coeffs) > settings.ZERO_TOL * max(1.0, np.abs(coeffs).max())
            if not nz.any():
                continue
            first = int(np.argmax(nz))
            if len(coeffs) - first <= 1:
                continue
            for r in np.roots(coeffs[first:]):
                if abs(r) <= settings.ROOT_MERGE_TOL:
                    continue
                mag = max(_magnitude(check, r, center), 1e-300)
                if abs(_eval(check, r, center)) / mag < settings.ROOT_MERGE_TOL * 10:
                    candidates.append(complex(r))
            if candidates:
                break
        distinct = [c for c, _ in _cluster(candidates)]
        if not distinct:
            logger.debug("spurious resultant root %s at %s", center, system.base)
            continue
        for r in distinct:
            found.append((r, center, max(1, mu // len(distinct))))

    roots: List[LeadingRoot] = []
    for r1, r2, mu in found:
        u1, u2 = (r2, r1) if swapped else (r1, r2)
        u1, u2 = _polish(system, u1, u2)
        J = system.log_jacobian(u1, u2)
        det = complex(np.linalg.det(J))
        simple = abs(det) > settings.ROOT_MERGE_TOL * max(1.0, np.abs(J).max() ** 2)
        roots.append(LeadingRoot((u1, u2), 1 if simple else mu, det))

    roots.sort(
        key=lambda r: (
            round(r.units[0].real, 9),
            round(r.units[0].imag, 9),
            round(r.units[1].real, 9),
            round(r.units[1].imag, 9),
        )
    )
    return roots
