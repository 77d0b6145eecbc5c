import logging

from app.cli.router import cli_router
from app.core.config import settings

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

# Entry point: python -m app.main <command> ...
app = cli_router


@app.callback()
def root():
    """Landau-Ginzburg mirror critical point toolkit."""


if __name__ == "__main__":
    app()
