"""
Reading and writing scheme, certificate, map spec and facts files.

All files are UTF-8 JSON object trees. Duplicate keys are rejected, every
top-level section of a scheme or certificate is required (an empty family is
written as ``[]``), and pydantic errors are reported as ParseError with the
offending field path.
"""
import json
import re
from pathlib import Path
from typing import Any, Sequence, TypeVar, Union

from pydantic import BaseModel, ValidationError

from schemes.facts import Facts
from schemes.mapspec import MapSpec
from schemes.models import Certificate, Scheme
from utils.errors import ParseError
from utils.logging import get_logger

logger = get_logger(__name__)

SCHEME_SECTIONS = (
    "components", "s_curves", "u_curves", "s_boundary", "u_boundary",
    "tangencies", "windings", "attractors", "k_f",
)
CERTIFICATE_SECTIONS = (
    "component_map", "basis_changes", "curve_map", "boundary_curve_map",
    "tangency_map", "point_map", "m_values", "attractor_maps",
)
MAPSPEC_SECTIONS = ("saddles", "transitions")
FACTS_SECTIONS = ("roster",)

ModelT = TypeVar("ModelT", bound=BaseModel)


def _reject_duplicate_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    result: dict[str, Any] = {}
    for key, value in pairs:
        if key in result:
            raise ParseError(f"duplicate key '{key}'", field=key)
        result[key] = value
    return result


def _field_path(loc: Sequence[Union[str, int]]) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else str(part)
    return path


def _read_json(text: str, sections: Sequence[str], what: str) -> dict[str, Any]:
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as e:
        if not text[e.pos:].strip():
            missing = [key for key in sections if not re.search(rf'"{re.escape(key)}"\s*:', text)]
            if missing:
                raise ParseError(
                    f"truncated {what}: section '{missing[0]}' is missing",
                    line=e.lineno, column=e.colno, field=missing[0],
                ) from e
            raise ParseError(f"truncated {what}: {e.msg}", line=e.lineno, column=e.colno) from e
        raise ParseError(e.msg, line=e.lineno, column=e.colno) from e

    if not isinstance(data, dict):
        raise ParseError(f"{what} must be a JSON object")
    for key in sections:
        if key not in data:
            raise ParseError(f"missing section '{key}'", field=key)
    return data


def _validate(model: type[ModelT], data: dict[str, Any]) -> ModelT:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ParseError(first["msg"], field=_field_path(first["loc"])) from e


def _dump(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json", by_alias=True), indent=2, ensure_ascii=False) + "\n"


def _check_unique(labels: Sequence[str], namespace: str) -> None:
    seen = set()
    for label in labels:
        if label in seen:
            raise ParseError(f"duplicate id '{label}' among {namespace}", field=namespace)
        seen.add(label)


def _check_scheme_ids(s: Scheme) -> None:
    _check_unique([c.id for c in s.components], "components")
    _check_unique([c.id for c in s.curves()], "curves")
    _check_unique([c.id for c in s.boundary_curves()], "boundary curves")
    _check_unique([f.id for f in s.tangency_families], "tangency families")
    _check_unique([p.id for f in s.tangency_families for p in f.points], "tangency points")
    _check_unique([a.id for a in s.attractors], "attractors")
    for a in s.attractors:
        _check_unique([b.id for b in a.bunches], f"bunches of {a.id}")


def parse_scheme(text: str) -> Scheme:
    """Parse scheme file text; raises ParseError with a location on bad input."""
    data = _read_json(text, SCHEME_SECTIONS, "scheme")
    scheme = _validate(Scheme, data)
    _check_scheme_ids(scheme)
    return scheme


def serialize_scheme(s: Scheme) -> str:
    return _dump(s)


def parse_certificate(text: str) -> Certificate:
    data = _read_json(text, CERTIFICATE_SECTIONS, "certificate")
    return _validate(Certificate, data)


def serialize_certificate(c: Certificate) -> str:
    return _dump(c)


def parse_mapspec(text: str) -> MapSpec:
    data = _read_json(text, MAPSPEC_SECTIONS, "map spec")
    ms = _validate(MapSpec, data)
    _check_unique([c.saddle for c in ms.saddles], "saddles")
    _check_unique([g.id for g in ms.transitions], "transitions")
    return ms


def serialize_mapspec(ms: MapSpec) -> str:
    return _dump(ms)


def parse_facts(text: str) -> Facts:
    data = _read_json(text, FACTS_SECTIONS, "facts")
    facts = _validate(Facts, data)
    _check_unique([b.id for b in facts.roster], "roster")
    return facts


def serialize_facts(facts: Facts) -> str:
    return _dump(facts)


def _read_text(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror or e}") from e
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not valid UTF-8") from e


def _write_text(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.debug(f"Wrote {path}")


def load_scheme(path: Union[str, Path]) -> Scheme:
    return parse_scheme(_read_text(path))


def save_scheme(s: Scheme, path: Union[str, Path]) -> None:
    _write_text(path, serialize_scheme(s))


def load_certificate(path: Union[str, Path]) -> Certificate:
    return parse_certificate(_read_text(path))


def save_certificate(c: Certificate, path: Union[str, Path]) -> None:
    _write_text(path, serialize_certificate(c))


def load_mapspec(path: Union[str, Path]) -> MapSpec:
    return parse_mapspec(_read_text(path))


def load_facts(path: Union[str, Path]) -> Facts:
    return parse_facts(_read_text(path))


def save_mapspec(ms: MapSpec, path: Union[str, Path]) -> None:
    _write_text(path, serialize_mapspec(ms))


def save_facts(facts: Facts, path: Union[str, Path]) -> None:
    _write_text(path, serialize_facts(facts))
