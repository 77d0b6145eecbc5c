from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import drawsvg as draw
from rich.console import Console
from rich.table import Table

from app.core.critsolve.pipeline import SolveResult
from app.core.novikov import format_fraction
from app.core.schemas import VerificationVerdict
from app.core.toricmodel import MomentPolytope
from app.core.tropgeo.curve import EdgeKind, TropicalCurve
from app.core.tropgeo.subdivision import NewtonSubdivision

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# RENDER MODULE
# Purpose: deterministic SVG pictures of the tropical curve, its dual
#          subdivision and the moment polytope; rich tables for the console.
# Why: the pictures are compared byte for byte in tests, so every coordinate
#      is rounded and every element is emitted in a fixed order.
# -----------------------------------------------------------------------------


Point = Tuple[float, float]


class Theme:
    """Colour theme for pictures."""

    def __init__(
        self,
        background: str = "#ffffff",
        polytope_fill: str = "#eef2ff",
        polytope_stroke: str = "#6366f1",
        curve: Sequence[str] = ("#1e293b", "#2563eb", "#dc2626", "#16a34a"),
        geometric: str = "#16a34a",
        excluded: str = "#94a3b8",
        critical: str = "#f59e0b",
        text: str = "#1e293b",
    ):
        self.background = background
        self.polytope_fill = polytope_fill
        self.polytope_stroke = polytope_stroke
        self.curve = tuple(curve)
        self.geometric = geometric
        self.excluded = excluded
        self.critical = critical
        self.text = text

    def weight_colour(self, weight: int) -> str:
        return self.curve[min(weight, len(self.curve)) - 1]


def _r(x: float) -> float:
    return round(float(x), 3)


@dataclass
class Viewport:
    """Affine map from plane coordinates to SVG pixels (y axis flipped)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float
    size: int = 480
    pad: int = 24

    @classmethod
    def around(cls, points: Iterable[Point], margin: float = 0.35, size: int = 480) -> "Viewport":
        pts = list(points) or [(0.0, 0.0)]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
        m = span * margin
        cx, cy = (max(xs) + min(xs)) / 2, (max(ys) + min(ys)) / 2
        half = span / 2 + m
        return cls(cx - half, cy - half, cx + half, cy + half, size)

    @property
    def scale(self) -> float:
        return (self.size - 2 * self.pad) / (self.xmax - self.xmin)

    def map(self, p: Point) -> Point:
        x = self.pad + (float(p[0]) - self.xmin) * self.scale
        y = self.size - self.pad - (float(p[1]) - self.ymin) * self.scale
        return _r(x), _r(y)

    def ray_end(self, start: Point, direction: Tuple[int, int]) -> Point:
        """Far point of a ray, well outside the view."""
        reach = 2 * (self.xmax - self.xmin)
        norm = (direction[0] ** 2 + direction[1] ** 2) ** 0.5
        return (
            float(start[0]) + reach * direction[0] / norm,
            float(start[1]) + reach * direction[1] / norm,
        )


def _as_floats(p) -> Point:
    return (float(p[0]), float(p[1]))


class SceneRenderer:
    """
    Draws one model: moment polytope, tropical curve, vertex markers and
    critical points, plus an inset of the Newton subdivision.

    Example:
        svg = SceneRenderer().render(curve, polytope, result).as_svg()
    """

    def __init__(self, theme: Optional[Theme] = None, size: int = 480):
        self.theme = theme or Theme()
        self.size = size

    def render(
        self,
        curve: TropicalCurve,
        polytope: Optional[MomentPolytope] = None,
        result: Optional[SolveResult] = None,
        title: str = "",
        excluded: Iterable[Point] = (),
    ) -> draw.Drawing:
        """
        Args:
            excluded: tropical vertices to mark as non-geometric, in addition
                to those listed in `result`.
        """
        anchors: List[Point] = [_as_floats(v.coords) for v in curve.vertices]
        marked = {tuple(x) for x in excluded}
        if result is not None:
            marked |= {tuple(e.coords) for e in result.excluded}
        if polytope is not None:
            anchors.extend(_as_floats(v) for v in polytope.vertices)
        if not anchors:
            anchors = [_as_floats(e.anchor) for e in curve.edges]
        view = Viewport.around(anchors, size=self.size)

        d = draw.Drawing(self.size, self.size)
        d.append(draw.Rectangle(0, 0, self.size, self.size, fill=self.theme.background))
        clip = draw.ClipPath(id="view")
        clip.append(draw.Rectangle(0, 0, self.size, self.size))
        d.append(clip)

        if polytope is not None:
            self._render_polytope(d, view, polytope)
        self._render_curve(d, view, curve)
        self._render_vertices(d, view, curve, marked)
        if result is not None:
            self._render_points(d, view, result)
        self._render_inset(d, curve.subdivision)
        if title:
            d.append(draw.Text(title, 14, 8, 18, fill=self.theme.text, font_family="monospace"))
        return d

    def _render_polytope(self, d: draw.Drawing, view: Viewport, polytope: MomentPolytope) -> None:
        coords: List[float] = []
        for v in polytope.vertices:
            coords.extend(view.map(v))
        d.append(
            draw.Lines(
                *coords,
                close=True,
                fill=self.theme.polytope_fill,
                stroke=self.theme.polytope_stroke,
                stroke_width=1.5,
            )
        )

    def _render_curve(self, d: draw.Drawing, view: Viewport, curve: TropicalCurve) -> None:
        group = draw.Group(clip_path="url(#view)")
        for e in curve.edges:
            if e.kind == EdgeKind.BOUNDED:
                a = curve.vertex(e.start).coords
                b = curve.vertex(e.end).coords
            elif e.kind == EdgeKind.RAY:
                a = curve.vertex(e.start).coords
                b = view.ray_end(a, e.direction)
            else:
                a = view.ray_end(e.anchor, (-e.direction[0], -e.direction[1]))
                b = view.ray_end(e.anchor, e.direction)
            (x1, y1), (x2, y2) = view.map(a), view.map(b)
            group.append(
                draw.Line(
                    x1, y1, x2, y2,
                    stroke=self.theme.weight_colour(e.weight),
                    stroke_width=1 + e.weight,
                )
            )
        d.append(group)

    def _render_vertices(
        self,
        d: draw.Drawing,
        view: Viewport,
        curve: TropicalCurve,
        excluded: set,
    ) -> None:
        for v in curve.vertices:
            x, y = view.map(v.coords)
            colour = self.theme.excluded if tuple(v.coords) in excluded else self.theme.geometric
            d.append(draw.Circle(x, y, 4, fill=colour))
            if tuple(v.coords) in excluded:
                d.append(draw.Line(x - 6, y - 6, x + 6, y + 6, stroke=colour, stroke_width=1.5))
                d.append(draw.Line(x - 6, y + 6, x + 6, y - 6, stroke=colour, stroke_width=1.5))

    def _render_points(self, d: draw.Drawing, view: Viewport, result: SolveResult) -> None:
        counts: dict = {}
        for p in result.points:
            counts[p.valuation] = counts.get(p.valuation, 0) + 1
        for base in sorted(counts):
            x, y = view.map(base)
            d.append(
                draw.Rectangle(
                    _r(x - 3), _r(y - 3), 6, 6,
                    fill=self.theme.critical,
                    stroke=self.theme.text,
                    stroke_width=0.5,
                )
            )
            d.append(
                draw.Text(
                    str(counts[base]), 10, _r(x + 6), _r(y - 6),
                    fill=self.theme.text,
                    font_family="monospace",
                )
            )

    def _render_inset(self, d: draw.Drawing, S: NewtonSubdivision) -> None:
        """Newton subdivision in the top right corner, one lattice unit per 12 px."""
        if not S.support:
            return
        unit = 12
        xs = [v[0] for v in S.support]
        ys = [v[1] for v in S.support]
        w = (max(xs) - min(xs)) * unit
        h = (max(ys) - min(ys)) * unit
        ox = self.size - 12 - w
        oy = 12 + h

        def at(v) -> Point:
            return _r(ox + (v[0] - min(xs)) * unit), _r(oy - (v[1] - min(ys)) * unit)

        d.append(
            draw.Rectangle(
                _r(ox - 6), _r(oy - h - 6), w + 12, h + 12,
                fill=self.theme.background,
                stroke=self.theme.excluded,
                stroke_width=0.5,
            )
        )
        for cell in S.cells:
            coords: List[float] = []
            for v in cell.polygon:
                coords.extend(at(v))
            d.append(draw.Lines(*coords, close=True, fill="none", stroke=self.theme.text, stroke_width=0.75))
        for v in S.support:
            x, y = at(v)
            d.append(draw.Circle(x, y, 1.5, fill=self.theme.text))
        x0, y0 = at((0, 0))
        d.append(draw.Circle(x0, y0, 2.5, fill="none", stroke=self.theme.critical, stroke_width=1))


def render_svg(
    curve: TropicalCurve,
    polytope: Optional[MomentPolytope] = None,
    result: Optional[SolveResult] = None,
    title: str = "",
    excluded: Iterable[Point] = (),
) -> str:
    return SceneRenderer().render(curve, polytope, result, title, excluded).as_svg()


# =========================
# Console tables
# =========================
def _frac_pair(x) -> str:
    return f"({format_fraction(Fraction(x[0]))}, {format_fraction(Fraction(x[1]))})"


def points_table(result: SolveResult, terms: int = 2) -> Table:
    table = Table(title=f"critical points of {result.name}")
    for column in ("origin", "#", "kind", "valuation", "geometric", "morse", "critical value"):
        table.add_column(column)
    for p in result.points:
        d = p.to_dict(coords_terms=terms)
        table.add_row(
            p.origin,
            str(p.index),
            p.kind,
            _frac_pair(p.valuation),
            "yes" if p.geometric else "no",
            "[green]yes[/green]" if p.morse else "[red]no[/red]",
            d["critical_value"],
        )
    return table


def verdict_table(verdict: VerificationVerdict) -> Table:
    table = Table(title=f"verification of {verdict.model}")
    for column in ("step", "description", "found", "expected", "result"):
        table.add_column(column)
    for s in verdict.steps:
        table.add_row(
            str(s.step),
            s.description,
            str(s.found),
            str(s.expected),
            "[green]pass[/green]" if s.passed else "[red]fail[/red]",
        )
    for c in verdict.checks:
        table.add_row("-", c.name, "", "", "[green]pass[/green]" if c.passed else f"[red]fail[/red] {c.message}")
    return table


def print_result(result: SolveResult, console: Optional[Console] = None) -> None:
    console = console or Console()
    console.print(points_table(result))
    law = result.count_law
    colour = "green" if law.passed else ("yellow" if law.passed is None else "red")
    console.print(f"[{colour}]count: {law.found} found, {law.expected} expected[/{colour}]")
    for diag in result.diagnostics:
        console.print(f"[yellow]{diag['kind']}[/yellow] {diag.get('origin') or ''} {diag['message']}")
