from pathlib import Path

import typer

from handlers.common import EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_OK, emit_json, exit_with, guarded
from schemes.storage import load_facts
from services.separability import check_facts, check_finite_moduli_criteria, classify_saddles
from utils.logging import get_logger

logger = get_logger(__name__)
router = typer.Typer(help="Separability of one-dimensional basic sets.", no_args_is_help=True)
criteria_router = typer.Typer(help="Finite-moduli criteria over an intersection table.", no_args_is_help=True)


def _exit_code(decisions: list) -> int:
    if False in decisions:
        return EXIT_FAILED
    if None in decisions:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


@router.command("check")
@guarded
def check(file: Path = typer.Argument(..., help="Facts file.")):
    """Separability report per attractor and repeller."""
    reports = check_facts(load_facts(file))
    emit_json([r.model_dump(mode="json") for r in reports])
    exit_with(_exit_code([r.separable for r in reports]))


@criteria_router.command("check")
@guarded
def criteria(file: Path = typer.Argument(..., help="Facts file.")):
    """The five finite-moduli criteria plus the saddle classification."""
    facts = load_facts(file)
    report = check_finite_moduli_criteria(facts.table, facts.roster)
    saddles = classify_saddles(facts.table, facts.roster)
    emit_json({
        "finite_moduli": report.finite_moduli,
        "criteria": {c: r.model_dump(mode="json") for c, r in report.criteria.items()},
        "saddles": saddles.model_dump(mode="json"),
    })
    if saddles.violations:
        logger.warning(f"Saddle classification violated: {list(saddles.violations)}")
    exit_with(_exit_code([report.finite_moduli]))


def register_handlers(app: typer.Typer):
    app.add_typer(router, name="separability")
    app.add_typer(criteria_router, name="criteria")
