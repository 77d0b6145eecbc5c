import logging
from pathlib import Path
from typing import Annotated, List, Optional

import typer
from pydantic import ValidationError
from rich.table import Table

from app.cli.deps import (
    CONFIG_ERROR,
    console,
    err_console,
    handle_errors,
    input_arg,
    json_opt,
    load_input,
    run_config,
    tol_opt,
    trunc_opt,
    write_outputs,
)
from app.core.config import settings
from app.core.novikov import format_fraction, tolerance
from app.core.report.modelio import load_document, model_spec, replay, series_document, write_spec
from app.core.schemas import Command, NonToricBlowupSpec, ToricBlowupSpec
from app.core.toricmodel import cohomology_rank, hori_vafa, moment_polytope

logger = logging.getLogger(__name__)

router = typer.Typer()
blowup_router = typer.Typer(help="Toric and non-toric blowups of a model file")


def _int_pair(text: str) -> List[int]:
    try:
        x, y = (int(p) for p in text.split(","))
    except ValueError:
        err_console.print(f"[red]expected two integers like 0,1, got {text!r}[/red]")
        raise typer.Exit(CONFIG_ERROR)
    return [x, y]


@router.command("hori-vafa")
@handle_errors
def hori_vafa_cmd(
    input: input_arg,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
    json_path: json_opt = None,
):
    """Print the Hori-Vafa potential and W_min of a model file."""
    config = run_config(Command.HORI_VAFA, input, trunc_order, tol, json_path=json_path)
    with tolerance(config.tol):
        name, W, m, _ = load_input(config)
    if m is None:
        console.print(f"[yellow]{name} is a raw series; nothing to build[/yellow]")
        console.print(str(W))
        write_outputs(config, series_document(name, W))
        return

    HV = hori_vafa(m)
    console.print(f"[bold]W_HV[/bold]  = {HV}")
    console.print(f"[bold]W_min[/bold] = {W}")
    console.print(f"rank {cohomology_rank(m)}, truncation order {format_fraction(W.trunc_order)}")
    write_outputs(
        config,
        {
            "name": name,
            "hori_vafa": series_document(name, HV),
            "w_min": series_document(name, W),
            "rank": cohomology_rank(m),
            "polytope": [[format_fraction(x) for x in v] for v in moment_polytope(m).vertices],
        },
    )


@blowup_router.command("apply")
@handle_errors
def blowup_apply(
    input: input_arg,
    out: Annotated[Path, typer.Option("--out", help="Where to write the extended model (.json/.yaml)")],
    corner: Annotated[Optional[int], typer.Option("--corner", help="Toric blowup at this corner")] = None,
    size: Annotated[Optional[str], typer.Option("--size", help="Toric blowup size eta")] = None,
    force: Annotated[bool, typer.Option("--force", help="Skip the size bound check")] = False,
    ray: Annotated[Optional[str], typer.Option("--ray", help="Non-toric blowup on this ray, e.g. 0,1")] = None,
    sizes: Annotated[
        Optional[str], typer.Option("--sizes", help="Non-toric sizes, comma separated")
    ] = None,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
):
    """
    Append one blowup to the log of a model file and write the result.
    The whole log is replayed, so size bounds are checked against the real model.
    """
    config = run_config(Command.BLOWUP, input, trunc_order, tol)
    if (corner is None) == (ray is None):
        err_console.print("[red]give either --corner with --size or --ray with --sizes[/red]")
        raise typer.Exit(CONFIG_ERROR)

    spec = model_spec(load_document(config.input))
    try:
        if corner is not None:
            step = ToricBlowupSpec(corner=corner, size=size or "", force=force)
        else:
            step = NonToricBlowupSpec(ray=_int_pair(ray), sizes=(sizes or "").split(","))
    except ValidationError as e:
        err_console.print(f"[red]invalid blowup: {e.errors()[0]['msg']}[/red]")
        raise typer.Exit(CONFIG_ERROR) from e

    extended = spec.model_copy(update={"blowups": [*spec.blowups, step]})
    with tolerance(config.tol):
        m = replay(extended, config.trunc_order)[-1]
    write_spec(extended, out)

    table = Table(title=f"{m.name} after {len(extended.blowups)} blowups")
    table.add_column("ray")
    table.add_column("lambda")
    table.add_column("non-toric sizes")
    for r, lam in zip(m.rays, m.lambdas):
        table.add_row(
            str(r), format_fraction(lam), ", ".join(format_fraction(e) for e in m.nontoric_sizes(r))
        )
    console.print(table)
    console.print(f"{m.history[-1].describe()}; rank {cohomology_rank(m)}; written to {out}")
