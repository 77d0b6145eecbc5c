import functools
import logging
from pathlib import Path
from typing import Annotated, Any, Callable, Dict, Optional, Tuple

import orjson
import typer
from pydantic import ValidationError
from rich.console import Console

from app.core.config import settings
from app.core.errors import LGMirrorError
from app.core.laurent import LaurentSeries
from app.core.report.modelio import is_series_document, load_document, load_model, load_series
from app.core.schemas import Command, RunConfig
from app.core.toricmodel import ToricSurfaceModel, w_min

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

# exit code for bad options, same as for unreadable input files
CONFIG_ERROR = 4

# Shared options, reused by every command
input_arg = Annotated[Path, typer.Argument(help="Model file (.toml/.json/.yaml) or series file")]
trunc_opt = Annotated[
    Optional[str], typer.Option("--trunc-order", help="Truncation order, e.g. 3 or 5/2")
]
tol_opt = Annotated[float, typer.Option("--tol", help="Coefficient zero tolerance in (0, 1e-3]")]
seed_opt = Annotated[int, typer.Option("--seed", help="Seed for randomized sweeps")]
json_opt = Annotated[Optional[Path], typer.Option("--json", help="Write the JSON report here")]
svg_opt = Annotated[Optional[Path], typer.Option("--svg", help="Write the SVG picture here")]


def run_config(
    command: Command,
    input: Optional[Path] = None,
    trunc_order: Optional[str] = None,
    tol: float = settings.ZERO_TOL,
    seed: int = 0,
    json_path: Optional[Path] = None,
    svg_path: Optional[Path] = None,
) -> RunConfig:
    """
    Validate the command line into a RunConfig.

    Raises:
        typer.Exit: with code 4 when an option is invalid.
    """
    try:
        return RunConfig(
            command=command,
            input=input,
            trunc_order=trunc_order,
            tol=tol,
            seed=seed,
            json_path=json_path,
            svg_path=svg_path,
        )
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first["loc"])
        err_console.print(f"[red]invalid option {where}: {first['msg']}[/red]")
        raise typer.Exit(CONFIG_ERROR) from e


def handle_errors(func: Callable) -> Callable:
    """Turn package errors into their exit codes with a one-line message."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except LGMirrorError as e:
            logger.debug("command failed", exc_info=True)
            err_console.print(f"[red]{type(e).__name__}:[/red] {e.message}")
            raise typer.Exit(e.exit_code) from e

    return wrapper


def load_input(
    config: RunConfig,
) -> Tuple[str, LaurentSeries, Optional[ToricSurfaceModel], Optional[LaurentSeries]]:
    """
    Read the input file.

    Returns:
        (name, series, model, perturbation): for a model file the series is
        W_min and model is set; for a series file model and perturbation are None.
    """
    doc = load_document(config.input)
    if is_series_document(doc):
        name, W = load_series(config.input, config.trunc_order)
        return name, W, None, None
    m, perturbation = load_model(config.input, config.trunc_order)
    return m.name, w_min(m), m, perturbation


def write_outputs(config: RunConfig, report: Dict[str, Any], svg: Optional[str] = None) -> None:
    if config.json_path is not None:
        config.json_path.write_bytes(
            orjson.dumps(report, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
        )
        console.print(f"JSON report written to {config.json_path}")
    if config.svg_path is not None and svg is not None:
        config.svg_path.write_text(svg, encoding="utf-8")
        console.print(f"SVG written to {config.svg_path}")
