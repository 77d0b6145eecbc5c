from fractions import Fraction

from rich.console import Console

from app.core.report.render import (
    Theme,
    Viewport,
    points_table,
    print_result,
    render_svg,
    verdict_table,
)
from app.core.schemas import CheckResult, StepVerdict, VerificationVerdict
from app.core.toricmodel import moment_polytope, w_min
from app.core.tropgeo.curve import tropicalize


def test_viewport_flips_y():
    view = Viewport(0, 0, 1, 1, size=100, pad=0)
    assert view.map((0, 0)) == (0, 100)
    assert view.map((1, 1)) == (100, 0)
    assert view.map((Fraction(1, 2), Fraction(1, 4))) == (50, 75)


def test_weight_colour_saturates():
    theme = Theme(curve=("#000", "#111"))
    assert theme.weight_colour(1) == "#000"
    assert theme.weight_colour(5) == "#111"


async def test_svg_is_deterministic(p2, p2_result):
    curve = tropicalize(w_min(p2))
    polytope = moment_polytope(p2)
    first = render_svg(curve, polytope, p2_result, title="p2")
    second = render_svg(curve, polytope, p2_result, title="p2")
    assert first == second
    assert first.startswith("<?xml") or first.startswith("<svg")
    assert "url(#view)" in first
    assert ">3</text>" in first


def test_excluded_vertices_are_crossed(p2):
    curve = tropicalize(w_min(p2))
    plain = render_svg(curve)
    marked = render_svg(curve, excluded=[curve.vertices[0].coords])
    assert marked.count("<path") == plain.count("<path") + 2


async def test_points_table_lists_every_point(p2_result):
    table = points_table(p2_result)
    assert table.row_count == len(p2_result.points) == 3


async def test_print_result_reports_count(p2_result):
    console = Console(record=True, width=160)
    print_result(p2_result, console)
    assert "count: 3 found, 3 expected" in console.export_text()


def test_verdict_table_rows():
    verdict = VerificationVerdict(
        model="p2",
        digest="0",
        toric=3,
        nontoric=0,
        expected_rank=3,
        steps=[StepVerdict(step=0, description="base fan with 3 rays", found=3, expected=3)],
        checks=[CheckResult(name="count-equals-rank", passed=True)],
    )
    table = verdict_table(verdict)
    assert table.row_count == 2
