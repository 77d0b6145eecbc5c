from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from app.core.laurent import Base
from app.core.novikov import INF, NovikovScalar, Valuation, format_complex, format_fraction


# -----------------------------------------------------------------------------
# POINTS MODULE
# Purpose: result types shared by the critical point solvers.
# -----------------------------------------------------------------------------


def _val_text(v: Valuation) -> str:
    return "inf" if v == INF else format_fraction(v)


@dataclass(frozen=True)
class HessianData:
    """
    Hessian of W in unit coordinates at a critical point.

    `matrix` holds the coefficients of T^scale, where scale is the smallest
    entry valuation. `det_leading` and `det_valuation` describe the full
    Novikov determinant, and `morse` is decided by that determinant alone.
    At a point on a non-convenient edge `matrix` is singular while the
    determinant is not: det_valuation then exceeds 2 * scale.
    """

    matrix: Tuple[Tuple[complex, complex], Tuple[complex, complex]]
    scale: Valuation
    det_leading: complex
    det_valuation: Valuation
    morse: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matrix": [[format_complex(x) for x in row] for row in self.matrix],
            "scale": _val_text(self.scale),
            "det_leading": format_complex(self.det_leading),
            "det_valuation": _val_text(self.det_valuation),
            "morse": self.morse,
        }


@dataclass(frozen=True)
class CriticalPoint:
    coords: Tuple[NovikovScalar, NovikovScalar]
    units: Tuple[NovikovScalar, NovikovScalar]
    valuation: Base
    kind: str
    geometric: bool
    origin: str
    index: int
    critical_value: NovikovScalar
    hessian: HessianData
    residual_valuation: Valuation
    multiplicity: int = 1

    @property
    def morse(self) -> bool:
        return self.hessian.morse

    @property
    def value_key(self) -> Tuple[Valuation, complex]:
        return (self.critical_value.valuation, self.critical_value.leading_coefficient)

    def to_dict(self, coords_terms: Optional[int] = None) -> Dict[str, Any]:
        def text(s: NovikovScalar) -> str:
            if coords_terms is None:
                return s.to_text()
            return NovikovScalar(s.terms[:coords_terms], s.trunc_order, s.truncated).to_text()

        return {
            "origin": self.origin,
            "index": self.index,
            "kind": self.kind,
            "geometric": self.geometric,
            "valuation": [format_fraction(self.valuation[0]), format_fraction(self.valuation[1])],
            "coords": [text(self.coords[0]), text(self.coords[1])],
            "critical_value": text(self.critical_value),
            "critical_value_valuation": _val_text(self.critical_value.valuation),
            "morse": self.morse,
            "multiplicity": self.multiplicity,
            "hessian": self.hessian.to_dict(),
            "residual_valuation": _val_text(self.residual_valuation),
        }


def sort_key(point: CriticalPoint) -> Tuple[str, int]:
    return (point.origin, point.index)


def origin_vertex(vertex_id: int) -> str:
    return f"v{vertex_id:03d}"


def origin_edge(cell1_id: int) -> str:
    return f"e{cell1_id:03d}"
