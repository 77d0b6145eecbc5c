from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence, Tuple, Union

Number = Union[int, Fraction]
Vec = Tuple[Number, Number]
IntVec = Tuple[int, int]


# -----------------------------------------------------------------------------
# LATTICE MODULE
# Purpose: exact planar predicates on integer and rational points: orientation,
#          convex hulls, lattice lengths, primitive vectors, line intersections.
# Why: tropical and toric computations compare these values for equality, so
#      nothing here ever touches a float.
# -----------------------------------------------------------------------------


def det(u: Vec, v: Vec) -> Number:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Vec, v: Vec) -> Number:
    return u[0] * v[0] + u[1] * v[1]


def sub(u: Vec, v: Vec) -> Vec:
    return (u[0] - v[0], u[1] - v[1])


def add(u: Vec, v: Vec) -> Vec:
    return (u[0] + v[0], u[1] + v[1])


def scale(k: Number, u: Vec) -> Vec:
    return (k * u[0], k * u[1])


def cross(o: Vec, a: Vec, b: Vec) -> Number:
    """Twice the signed area of (o, a, b); positive for a left turn."""
    return det(sub(a, o), sub(b, o))


def rot_left(v: Vec) -> Vec:
    return (-v[1], v[0])


def rot_right(v: Vec) -> Vec:
    return (v[1], -v[0])


def lattice_length(a: IntVec, b: IntVec) -> int:
    """Number of lattice steps on the segment a-b."""
    return math.gcd(b[0] - a[0], b[1] - a[1])


def primitive(v: IntVec) -> IntVec:
    g = math.gcd(v[0], v[1])
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return (v[0] // g, v[1] // g)


def is_primitive(v: IntVec) -> bool:
    return math.gcd(v[0], v[1]) == 1


def convex_hull(points: Iterable[Vec]) -> list[Vec]:
    """
    Strict convex hull, counterclockwise, starting at the lowest-leftmost point.

    Collinear boundary points are dropped. Degenerate inputs return one point
    or the two segment endpoints.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    lower: list[Vec] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Vec] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def area2(polygon: Sequence[Vec]) -> Number:
    """Twice the area of a counterclockwise polygon (the normalized lattice volume)."""
    n = len(polygon)
    if n < 3:
        return 0
    return sum(det(polygon[i], polygon[(i + 1) % n]) for i in range(n))


def strictly_inside(point: Vec, polygon: Sequence[Vec]) -> bool:
    n = len(polygon)
    if n < 3:
        return False
    return all(cross(polygon[i], polygon[(i + 1) % n], point) > 0 for i in range(n))


def inside_or_on(point: Vec, polygon: Sequence[Vec]) -> bool:
    n = len(polygon)
    if n < 3:
        return False
    return all(cross(polygon[i], polygon[(i + 1) % n], point) >= 0 for i in range(n))


def intersect_lines(n1: Vec, c1: Number, n2: Vec, c2: Number) -> Tuple[Fraction, Fraction]:
    """
    Solve <x, n1> = c1, <x, n2> = c2 exactly.

    Raises:
        ValueError: if the normals are parallel.
    """
    d = det(n1, n2)
    if d == 0:
        raise ValueError(f"parallel lines with normals {n1} and {n2}")
    x = Fraction(c1 * n2[1] - c2 * n1[1]) / d
    y = Fraction(n1[0] * c2 - n2[0] * c1) / d
    return (x, y)


def _half(v: Vec) -> int:
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def angle_sort(vectors: Iterable[Vec]) -> list[Vec]:
    """Sort nonzero vectors counterclockwise by angle, starting at the positive x axis."""

    def compare(u: Vec, v: Vec) -> int:
        hu, hv = _half(u), _half(v)
        if hu != hv:
            return hu - hv
        d = det(u, v)
        return -1 if d > 0 else (1 if d < 0 else 0)

    return sorted(vectors, key=cmp_to_key(compare))


@dataclass(frozen=True)
class LatticePolygon:
    """Convex lattice polygon stored by its counterclockwise strict vertices."""

    vertices: Tuple[IntVec, ...]

    @classmethod
    def hull_of(cls, points: Iterable[IntVec]) -> "LatticePolygon":
        return cls(tuple(convex_hull(points)))

    @property
    def dimension(self) -> int:
        return min(len(self.vertices) - 1, 2)

    @property
    def area2(self) -> int:
        return int(area2(self.vertices))

    def edges(self) -> list[Tuple[IntVec, IntVec]]:
        n = len(self.vertices)
        if n < 2:
            return []
        if n == 2:
            return [(self.vertices[0], self.vertices[1])]
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def contains(self, point: IntVec) -> bool:
        if self.dimension == 2:
            return inside_or_on(point, self.vertices)
        if self.dimension == 1:
            a, b = self.vertices
            return cross(a, b, point) == 0 and min(a, b) <= tuple(point) <= max(a, b)
        return tuple(point) == self.vertices[0]

    def minkowski_sum(self, other: "LatticePolygon") -> "LatticePolygon":
        return LatticePolygon.hull_of(
            add(p, q) for p in self.vertices for q in other.vertices
        )

    def to_dict(self) -> dict:
        return {"vertices": [list(v) for v in self.vertices], "area2": self.area2}
