import logging
from typing import Any, Dict, List

import typer
from rich.table import Table

from app.cli.deps import (
    console,
    handle_errors,
    input_arg,
    json_opt,
    load_input,
    run_config,
    svg_opt,
    tol_opt,
    trunc_opt,
    write_outputs,
)
from app.core.config import settings
from app.core.novikov import format_fraction, tolerance
from app.core.report.render import render_svg
from app.core.schemas import Command
from app.core.toricmodel import classify_vertex, moment_polytope
from app.core.tropgeo.convenience import is_convenient, is_locally_convenient, kushnirenko_count
from app.core.tropgeo.curve import is_balanced, total_weight, tropicalize
from app.core.tropgeo.subdivision import newton_subdivision

logger = logging.getLogger(__name__)

router = typer.Typer()


@router.command("tropicalize")
@handle_errors
def tropicalize_cmd(
    input: input_arg,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
    json_path: json_opt = None,
    svg_path: svg_opt = None,
):
    """
    Tropical curve of W_min (model file) or of a raw series.
    For models every vertex is classified as geometric or excluded.
    """
    config = run_config(
        Command.TROPICALIZE, input, trunc_order, tol, json_path=json_path, svg_path=svg_path
    )
    with tolerance(config.tol):
        name, W, m, _ = load_input(config)
        curve = tropicalize(W)

    classes: List[Dict[str, Any]] = []
    excluded = []
    if m is not None:
        for v in curve.vertices:
            cls = classify_vertex(m, v.coords, curve.minimizers(v.coords))
            classes.append(
                {
                    "vertex": v.id,
                    "kind": cls.kind,
                    "in_polytope": cls.in_polytope,
                    "filter_ok": cls.filter_ok,
                    "geometric": cls.geometric,
                }
            )
            if not cls.geometric:
                excluded.append(v.coords)

    table = Table(title=f"tropical vertices of {name}")
    for column in ("id", "coords", "weight", "geometric"):
        table.add_column(column)
    geometric = {c["vertex"]: c["geometric"] for c in classes}
    for v in curve.vertices:
        flag = geometric.get(v.id)
        table.add_row(
            str(v.id),
            f"({format_fraction(v.coords[0])}, {format_fraction(v.coords[1])})",
            str(v.weight),
            "-" if flag is None else ("yes" if flag else "[red]excluded[/red]"),
        )
    console.print(table)

    report = {
        "name": name,
        "curve": curve.to_dict(),
        "balanced": is_balanced(curve),
        "total_weight": total_weight(curve),
        "vertex_classes": classes,
    }
    polytope = moment_polytope(m) if m is not None else None
    svg = render_svg(curve, polytope, title=name, excluded=excluded) if config.svg_path else None
    write_outputs(config, report, svg)


@router.command("subdivide")
@handle_errors
def subdivide_cmd(
    input: input_arg,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
    json_path: json_opt = None,
):
    """Newton subdivision with the convenience and Kushnirenko checks."""
    config = run_config(Command.SUBDIVIDE, input, trunc_order, tol, json_path=json_path)
    with tolerance(config.tol):
        name, W, _, _ = load_input(config)
        S = newton_subdivision(W)

    convenient = is_convenient(W)
    local = is_locally_convenient(S)
    console.print(
        f"{name}: {len(S.cells)} cells, {len(S.cells1)} edges, "
        f"convenient: {convenient}, locally convenient: {local.ok}"
    )
    for cell1 in local.bad_cells1:
        console.print(f"  [yellow]non-convenient edge[/yellow] {list(cell1.endpoints)}")
    report = {
        "name": name,
        "subdivision": S.to_dict(),
        "convenient": convenient,
        "local_convenience": local.to_dict(),
        "kushnirenko": kushnirenko_count(W) if convenient else None,
    }
    write_outputs(config, report)
