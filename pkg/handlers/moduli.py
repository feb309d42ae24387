from pathlib import Path
from typing import Optional

import typer

from config import settings
from handlers.common import EXIT_FAILED, EXIT_OK, emit_json, exit_with, guarded
from schemes.storage import load_mapspec
from services.moduli import compute_mapspec, minimal_k_f, tau_iterate
from utils.logging import get_logger

logger = get_logger(__name__)
router = typer.Typer(help="Moduli of tangency orbits.", no_args_is_help=True)


@router.command("compute")
@guarded
def compute(
    mapspec: Path = typer.Argument(..., help="Map spec file."),
    fd_step: Optional[float] = typer.Option(None, "--fd-step", help="Initial finite-difference step."),
    fd_tol: Optional[float] = typer.Option(None, "--fd-tol", help="Finite-difference relative tolerance."),
):
    """tau, contact order and claim checks for every declared tangency."""
    ms = load_mapspec(mapspec)
    reports = compute_mapspec(
        ms,
        fd_step=fd_step if fd_step is not None else settings.FD_STEP,
        fd_tol=fd_tol if fd_tol is not None else settings.FD_TOL,
    )
    emit_json({
        "k_f": minimal_k_f(ms.saddles),
        "tangencies": [r.model_dump(mode="json", by_alias=True) for r in reports],
    })
    disagreements = [r.transition for r in reports if r.claim_agrees is False or r.image_point_agrees is False]
    if disagreements:
        logger.warning(f"Declared tangency data disagrees for {disagreements}")
    exit_with(EXIT_FAILED if disagreements else EXIT_OK)


@router.command("iterate")
@guarded
def iterate(
    tau: float = typer.Option(..., "--tau", help="Modulus of the starting point."),
    lam: float = typer.Option(..., "--lambda", help="Contracting eigenvalue."),
    mu: float = typer.Option(..., "--mu", help="Expanding eigenvalue."),
    k: int = typer.Option(..., "--k", help="Number of iterates."),
):
    """tau of f^k(a) from tau of a."""
    emit_json({"tau": repr(tau), "k": k, "tau_k": repr(tau_iterate(tau, lam, mu, k))})


def register_handlers(app: typer.Typer):
    app.add_typer(router, name="moduli")
