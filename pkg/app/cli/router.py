import typer

from app.cli.commands import model, solve, tropical, verify

cli_router = typer.Typer(
    help="Critical points of Landau-Ginzburg mirrors of toric surfaces and their blowups",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)

# Combine all command groups into one
cli_router.add_typer(tropical.router)
cli_router.add_typer(model.router)
cli_router.add_typer(model.blowup_router, name="blowup")
cli_router.add_typer(solve.router)
cli_router.add_typer(verify.router)
