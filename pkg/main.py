import typer

import handlers
from utils.logging import get_logger, set_verbose, setup_logging

# Setup logging
setup_logging()
logger = get_logger(__name__)

app = typer.Typer(
    name="scheme-kit",
    help=(
        "Schemes of surface A-diffeomorphisms: validation, equivalence, moduli, "
        "separability and fixtures.\n\n"
        "Exit codes: 0=ok/equivalent, 1=failed/not equivalent, 2=inconclusive, 3=invalid input."
    ),
    add_completion=False,
    no_args_is_help=True,
)

# Register handlers
handlers.register_handlers(app)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level.")) -> None:
    set_verbose(verbose)
    logger.debug("Verbose logging enabled")


if __name__ == "__main__":
    app()
