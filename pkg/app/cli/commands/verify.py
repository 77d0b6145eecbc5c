import logging
from pathlib import Path
from typing import Annotated, Optional

import typer

from app.cli.deps import console, handle_errors, json_opt, run_config, seed_opt, tol_opt, trunc_opt, write_outputs
from app.core.config import settings
from app.core.errors import ModelError, VerificationFailure
from app.core.novikov import tolerance
from app.core.report.modelio import load_document, model_spec, replay
from app.core.report.render import verdict_table
from app.core.report.verify import equal_size_comparison, sweep, verify_model
from app.core.schemas import Command

logger = logging.getLogger(__name__)

router = typer.Typer()


@router.command("verify")
@handle_errors
def verify_cmd(
    input: Annotated[Optional[str], typer.Argument(help="Model file with a blowup log")] = None,
    sweep_count: Annotated[
        int, typer.Option("--sweep", help="Verify this many random models instead of a file")
    ] = 0,
    compare_corner: Annotated[
        Optional[int],
        typer.Option("--compare-corner", help="Also compare equal-size blowups at this corner"),
    ] = None,
    compare_size: Annotated[
        Optional[str], typer.Option("--compare-size", help="Size for the equal-size comparison")
    ] = None,
    trunc_order: trunc_opt = None,
    tol: tol_opt = settings.ZERO_TOL,
    seed: seed_opt = 0,
    json_path: json_opt = None,
):
    """
    Replay a blowup log and check every step: one new Morse point per
    exceptional divisor, earlier points unmoved, final count equal to the rank.
    """
    config = run_config(
        Command.VERIFY,
        Path(input) if input else None,
        trunc_order,
        tol,
        seed,
        json_path=json_path,
    )
    with tolerance(config.tol):
        if sweep_count > 0:
            verdicts = sweep(sweep_count, config.seed)
        elif config.input is not None:
            spec = model_spec(load_document(config.input))
            verdict = verify_model(spec, config.trunc_order)
            if compare_corner is not None:
                if compare_size is None:
                    raise ModelError("--compare-corner needs --compare-size")
                base = replay(spec, config.trunc_order)[-1]
                verdict.checks.append(equal_size_comparison(base, compare_corner, compare_size))
            verdicts = [verdict]
        else:
            raise ModelError("give a model file or --sweep N")

    for verdict in verdicts:
        console.print(verdict_table(verdict))
        status = "[green]PASS[/green]" if verdict.passed else f"[red]FAIL[/red] {verdict.first_failure}"
        console.print(f"{verdict.model} ({verdict.digest[:12]}): {status}")

    report = {"verdicts": [v.to_report() for v in verdicts], "seed": config.seed}
    write_outputs(config, report)

    failed = [v.model for v in verdicts if not v.passed]
    if failed:
        raise VerificationFailure(f"{len(failed)} of {len(verdicts)} models failed: {', '.join(failed)}")
