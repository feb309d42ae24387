from enum import Enum
from pathlib import Path

import typer

from handlers.common import guarded
from schemes.storage import load_mapspec
from services.plotting import emit_separatrix_polyline, write_polyline_csv
from utils.logging import get_logger

logger = get_logger(__name__)
router = typer.Typer(help="CSV plot data.", no_args_is_help=True)


class SeparatrixKind(str, Enum):
    stable = "stable"
    unstable = "unstable"


@router.command("separatrix")
@guarded
def separatrix(
    mapspec: Path = typer.Argument(..., help="Map spec file."),
    saddle: str = typer.Option(..., "--saddle", help="Saddle whose axis is sampled."),
    kind: SeparatrixKind = typer.Option(SeparatrixKind.stable, "--kind"),
    samples: int = typer.Option(50, "--samples", min=1),
    start: float = typer.Option(-1.0, "--from", help="First axis coordinate."),
    stop: float = typer.Option(1.0, "--to", help="Last axis coordinate."),
    output: Path = typer.Option(..., "-o", "--output", help="CSV file (header x,y)."),
):
    """Separatrix image through the transitions leaving a saddle."""
    points = emit_separatrix_polyline(load_mapspec(mapspec), saddle, kind.value, samples, (start, stop))
    write_polyline_csv(points, output)
    logger.info(f"Wrote {len(points)} samples to {output}")


def register_handlers(app: typer.Typer):
    app.add_typer(router, name="plot")
