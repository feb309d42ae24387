from pathlib import Path
from typing import Optional

import typer

from handlers.common import EXIT_FAILED, EXIT_OK, OUTCOME_EXIT_CODES, emit_json, emit_model, exit_with, guarded
from schemes.storage import load_certificate, load_scheme, save_certificate
from schemes.validation import validate_scheme
from services.equivalence import CheckOptions, schemes_equivalent
from utils.logging import get_logger

logger = get_logger(__name__)
router = typer.Typer(help="Validate and compare scheme files.", no_args_is_help=True)


@router.command("validate")
@guarded
def validate(file: Path = typer.Argument(..., help="Scheme file to check.")):
    """Check every structural invariant; exit 1 when any is violated."""
    report = validate_scheme(load_scheme(file))
    emit_model(report)
    if not report.ok:
        logger.warning(f"{file}: {len(report.violations)} violation(s)")
    exit_with(EXIT_OK if report.ok else EXIT_FAILED)


@router.command("compare")
@guarded
def compare(
    a: Path = typer.Argument(..., help="First scheme file."),
    b: Path = typer.Argument(..., help="Second scheme file."),
    certificate: Optional[Path] = typer.Option(None, "--certificate", help="Certificate to verify instead of searching."),
    matrix_bound: Optional[int] = typer.Option(None, "--matrix-bound", min=1, help="Largest basis-change entry searched."),
    m_bound: Optional[int] = typer.Option(None, "--m-bound", min=1, help="Largest |m| searched in condition 4b."),
    tol: Optional[float] = typer.Option(None, "--tol", help="Relative tolerance for real comparisons."),
    orientation_preserving: Optional[bool] = typer.Option(
        None, "--orientation-preserving/--any-orientation", help="Only accept det +1 basis changes."
    ),
    witness_out: Optional[Path] = typer.Option(None, "--witness-out", help="Write the witnessing certificate here."),
):
    """
    Decide equivalence. Exit 0 equivalent, 1 not equivalent, 2 inconclusive,
    3 invalid input.
    """
    overrides = {
        "matrix_bound": matrix_bound,
        "m_bound": m_bound,
        "rel_tol": tol,
        "orientation_preserving": orientation_preserving,
    }
    opts = CheckOptions(**{k: v for k, v in overrides.items() if v is not None})
    cert = load_certificate(certificate) if certificate else None
    verdict = schemes_equivalent(load_scheme(a), load_scheme(b), cert, opts)

    emit_json({"outcome": verdict.outcome, **verdict.model_dump(mode="json", by_alias=True)})
    if witness_out and verdict.witness is not None:
        save_certificate(verdict.witness, witness_out)
        logger.info(f"Witness written to {witness_out}")
    exit_with(OUTCOME_EXIT_CODES[verdict.outcome])


def register_handlers(app: typer.Typer):
    """Register the scheme command group"""
    app.add_typer(router, name="scheme")
