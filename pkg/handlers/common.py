import functools
import json
from typing import Any, Callable

import typer
from pydantic import BaseModel
from rich.console import Console
from rich.markup import escape

from services.gl2z import IntMatrix
from utils.errors import SchemeKitError, ValidationFailed
from utils.logging import get_logger

logger = get_logger(__name__)

# Human-facing messages go to stderr; stdout carries JSON only
console = Console(stderr=True, soft_wrap=True)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INVALID = 3

OUTCOME_EXIT_CODES = {
    "equivalent": EXIT_OK,
    "not-equivalent": EXIT_FAILED,
    "inconclusive": EXIT_INCONCLUSIVE,
}


def emit_json(data: Any) -> None:
    typer.echo(json.dumps(data, indent=2, ensure_ascii=False))


def emit_model(model: BaseModel) -> None:
    emit_json(model.model_dump(mode="json", by_alias=True))


def exit_with(code: int) -> None:
    if code != EXIT_OK:
        raise typer.Exit(code)


def guarded(fn: Callable) -> Callable:
    """Report SchemeKitError as one stderr line and exit with the invalid-input code."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SchemeKitError as e:
            message = str(e)
            if isinstance(e, ValidationFailed):
                message += ": " + "; ".join(e.report.messages())
            logger.error(f"{fn.__name__} failed: {message}")
            console.print(f"[red bold]Error:[/red bold] {escape(message)}")
            raise typer.Exit(EXIT_INVALID)
    return wrapper


def parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise SchemeKitError(f"{what} must be comma-separated integers, got {text!r}")


def parse_matrix(text: str, what: str = "matrix") -> IntMatrix:
    """'a,b,c,d' -> ((a, b), (c, d))."""
    entries = parse_int_list(text, what)
    if len(entries) != 4:
        raise SchemeKitError(f"{what} needs four entries a,b,c,d, got {len(entries)}")
    return (entries[0], entries[1]), (entries[2], entries[3])
