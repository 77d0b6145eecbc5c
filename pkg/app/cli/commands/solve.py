import asyncio
import logging
from pathlib import Path
from typing import Annotated, Optional

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
from app.core.critsolve.continuum import ContinuumTrajectory, continuum_model, continuum_scan
from app.core.critsolve.pipeline import find_all_geometric, find_all_geometric_async, solve_series
from app.core.errors import ModelError
from app.core.novikov import format_fraction, tolerance
from app.core.report.modelio import load_model
from app.core.report.render import print_result, render_svg
from app.core.schemas import Command
from app.core.toricmodel import moment_polytope
from app.core.tropgeo.curve import tropicalize

logger = logging.getLogger(__name__)

router = typer.Typer()

# exit code when the count law fails
COUNT_MISMATCH = 2


def _print_trajectory(trajectory: ContinuumTrajectory) -> None:
    table = Table(title="critical valuations along the bulk deformation")
    for column in ("eps", "branch", "label", "valuation", "local", "mult"):
        table.add_column(column)
    for eps, frame in zip(trajectory.eps_values, trajectory.frames):
        for q in frame:
            d = q.to_dict()
            table.add_row(
                format_fraction(eps),
                f"{q.branch:+d}",
                q.label,
                "(" + ", ".join(d["valuation"]) + ")",
                "(" + ", ".join(d["local"]) + ")",
                str(q.multiplicity),
            )
    console.print(table)
    console.print(f"linear motion: {trajectory.is_linear()}")


@router.command("solve")
@handle_errors
def solve_cmd(
    input: input_arg,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
    json_path: json_opt = None,
    svg_path: svg_opt = None,
    strict: Annotated[bool, typer.Option("--strict", help="Fail on genericity violations")] = False,
    parallel: Annotated[
        bool, typer.Option("--parallel", help="Solve tropical vertices concurrently")
    ] = False,
    eps_sweep: Annotated[
        int, typer.Option("--eps-sweep", help="Also scan the bulk deformation at this many values")
    ] = 0,
    with_logs: Annotated[bool, typer.Option("--with-logs", help="Keep solver logs in the JSON")] = False,
    terms: Annotated[int, typer.Option("--terms", help="Novikov terms per coordinate in the JSON")] = 3,
):
    """
    Every geometric critical point of a model (or every critical point of a
    raw series), with Hessians, critical values and the count law.
    """
    config = run_config(
        Command.SOLVE, input, trunc_order, tol, json_path=json_path, svg_path=svg_path
    )
    with tolerance(config.tol):
        name, W, m, perturbation = load_input(config)
        if m is None:
            result = solve_series(W, name, strict=strict)
        elif parallel:
            result = asyncio.run(find_all_geometric_async(m, perturbation, strict=strict))
        else:
            result = find_all_geometric(m, perturbation, strict=strict)

    print_result(result, console)
    report = result.to_dict(coords_terms=terms)
    if not with_logs:
        report.pop("logs")

    if eps_sweep > 0:
        if m is None:
            raise ModelError("--eps-sweep needs a model file")
        trajectory = continuum_scan(m, steps=eps_sweep)
        _print_trajectory(trajectory)
        report["continuum"] = trajectory.to_dict()

    svg = None
    if config.svg_path is not None:
        polytope = moment_polytope(m) if m is not None else None
        svg = render_svg(tropicalize(W), polytope, result, title=name)
    write_outputs(config, report, svg)

    if result.count_law.passed is False:
        raise typer.Exit(COUNT_MISMATCH)


@router.command("scan-continuum")
@handle_errors
def scan_continuum_cmd(
    input: Annotated[
        Optional[str], typer.Argument(help="Model file of F_k blown up with size b/2")
    ] = None,
    k: Annotated[Optional[int], typer.Option("--k", help="Hirzebruch index")] = None,
    a: Annotated[Optional[str], typer.Option("--a", help="Polytope parameter a")] = None,
    b: Annotated[Optional[str], typer.Option("--b", help="Polytope parameter b")] = None,
    eps: Annotated[Optional[str], typer.Option("--eps", help="Comma separated eps values")] = None,
    steps: Annotated[int, typer.Option("--steps", help="Evenly spaced eps values")] = 5,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
    json_path: json_opt = None,
):
    """Track the critical points of W + T^eps z1 as eps sweeps its open range."""
    config = run_config(
        Command.SCAN_CONTINUUM,
        Path(input) if input else None,
        trunc_order,
        tol,
        json_path=json_path,
    )
    with tolerance(config.tol):
        if config.input is not None:
            m, _ = load_model(config.input, config.trunc_order)
        elif k is not None and a is not None and b is not None:
            m = continuum_model(k, a, b, config.trunc_order)
        else:
            raise ModelError("give a model file or all of --k, --a and --b")

        values = [v.strip() for v in eps.split(",") if v.strip()] if eps else None
        trajectory = continuum_scan(m, values, steps=steps)
    _print_trajectory(trajectory)
    write_outputs(config, trajectory.to_dict())
