from fractions import Fraction
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError

from handlers.common import emit_model, guarded, parse_int_list, parse_matrix
from schemes.storage import save_certificate, save_mapspec, save_scheme
from services.fixtures import (
    DaParams,
    build_da_scheme,
    build_tangency_fixture,
    build_tangency_mapspec,
    conjugated_da_params,
    da_certificate,
)
from utils.errors import FixtureError
from utils.logging import get_logger

logger = get_logger(__name__)
router = typer.Typer(help="Generate fixture files.", no_args_is_help=True)


def _write_or_print(model, output: Optional[Path], save) -> None:
    if output is None:
        emit_model(model)
    else:
        save(model, output)
        logger.info(f"Fixture written to {output}")


@router.command("da")
@guarded
def da(
    matrix: str = typer.Option(..., "--matrix", help="Hyperbolic matrix as a,b,c,d (det 1)."),
    tau: float = typer.Option(1.0, "--tau", help="tau of the attached tangency point."),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Attach a tangency family with this lambda."),
    mu: Optional[float] = typer.Option(None, "--mu", help="... and this mu."),
    conjugate_by: Optional[str] = typer.Option(None, "--conjugate-by", help="Build from P A P^-1 for P = a,b,c,d."),
    certificate_out: Optional[Path] = typer.Option(None, "--certificate-out", help="With --conjugate-by: certificate from the A scheme."),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Scheme file to write; stdout if omitted."),
):
    """Scheme of a DA diffeomorphism."""
    try:
        params = DaParams.model_validate({"matrix": parse_matrix(matrix), "tau_seed": tau, "lambda": lam, "mu": mu})
    except ValidationError as e:
        raise FixtureError(e.errors()[0]["msg"])

    scheme = build_da_scheme(params)
    if conjugate_by is not None:
        p = parse_matrix(conjugate_by, "--conjugate-by")
        try:
            conjugated = build_da_scheme(conjugated_da_params(params, p))
        except ValueError as e:
            raise FixtureError(str(e))
        if certificate_out is not None:
            save_certificate(da_certificate(scheme, conjugated, p), certificate_out)
        scheme = conjugated
    elif certificate_out is not None:
        raise FixtureError("--certificate-out needs --conjugate-by")
    _write_or_print(scheme, output, save_scheme)


@router.command("tangency")
@guarded
def tangency(
    points: int = typer.Option(2, "--points", min=1, help="Points per family."),
    components: int = typer.Option(1, "--components", min=1, max=2, help="Orbit-space tori (1 or 2)."),
    lam: float = typer.Option(0.5, "--lambda"),
    mu: float = typer.Option(2.0, "--mu"),
    tau: float = typer.Option(1.0, "--tau", help="tau of the first point."),
    windings: Optional[str] = typer.Option(None, "--windings", help="Winding pattern k_0,k_1,..."),
    families: int = typer.Option(1, "--families", min=1),
    output: Optional[Path] = typer.Option(None, "-o", "--output"),
):
    """Synthetic tangency families with tau = tau_seed * |lambda/mu|^k_i."""
    pattern = parse_int_list(windings, "--windings") if windings else None
    try:
        scheme = build_tangency_fixture(points, components, lam, mu, tau, pattern, families)
    except ValidationError as e:
        raise FixtureError(e.errors()[0]["msg"])
    _write_or_print(scheme, output, save_scheme)


@router.command("mapspec")
@guarded
def mapspec(
    tau: str = typer.Option("1", "--tau", help="Exact tau, e.g. 3/2."),
    order: int = typer.Option(2, "--order", min=1, help="Contact order of the tangency."),
    output: Optional[Path] = typer.Option(None, "-o", "--output"),
):
    """Two saddle charts joined by one polynomial transition with a tangency."""
    try:
        value = Fraction(tau)
    except (ValueError, ZeroDivisionError):
        raise FixtureError(f"--tau must be a rational number, got {tau!r}")
    _write_or_print(build_tangency_mapspec(tau=value, order=order), output, save_mapspec)


def register_handlers(app: typer.Typer):
    app.add_typer(router, name="fixture")
