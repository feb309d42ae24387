"""
Pydantic models for schemes, equivalence certificates and verdicts.

Every model is frozen and carries the frozen file keys as aliases, so
`model_dump(mode="json", by_alias=True)` is exactly the on-disk form.
"""
import math
from fractions import Fraction
from typing import Annotated, Any, Literal, Optional

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    StringConstraints,
    field_serializer,
)

from services.free_groups import FreeGroupAut, identity_automorphism
from services.gl2z import IDENTITY, IntMatrix

Label = Annotated[str, StringConstraints(min_length=1, strip_whitespace=True)]
IntPair = tuple[int, int]


def _parse_real(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError("expected a real number, got a boolean")
    if isinstance(value, (int, float, Fraction)):
        result = float(value)
    elif isinstance(value, str):
        try:
            result = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a real number: {value!r}")
    else:
        raise ValueError(f"expected a real number, got {type(value).__name__}")
    if not math.isfinite(result):
        raise ValueError("real numbers must be finite")
    return result


def _parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ValueError("expected a rational number, got a boolean")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("rational numbers must be finite")
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational number: {value!r}")
    raise ValueError(f"expected a rational number, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


# Reals are written as shortest round-trip decimal strings
Real = Annotated[float, PlainValidator(_parse_real), PlainSerializer(repr, return_type=str)]
Rational = Annotated[Fraction, PlainValidator(_parse_rational), PlainSerializer(format_rational, return_type=str)]


def _automorphism_from_images(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return {"rank": len(value), "images": list(value)}
    return value


Automorphism = Annotated[
    FreeGroupAut,
    BeforeValidator(_automorphism_from_images),
    PlainSerializer(lambda aut: [str(image) for image in aut.images], return_type=list),
]


class FrozenModel(BaseModel):
    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        extra="forbid",
        arbitrary_types_allowed=True,
    )


class TorusComponent(FrozenModel):
    id: Label
    action_matrix: IntMatrix
    image_component: Label


class SeparatrixCurve(FrozenModel):
    id: Label
    kind: Literal["stable", "unstable"]
    saddle: Label
    component: Label
    homotopy_class: IntPair
    partner: Label


class BoundaryCurve(FrozenModel):
    id: Label
    attractor: Label
    boundary_point: Label
    component: Label
    homotopy_class: IntPair


class TangencyPoint(FrozenModel):
    id: Label
    component: Label
    host_curve: Label
    tau: Real
    order: int = Field(default=2, ge=1)


class TangencyFamily(FrozenModel):
    id: Label
    saddle_s: Label
    saddle_u: Label
    lam: Real = Field(alias="lambda")
    mu: Real
    points: tuple[TangencyPoint, ...] = ()


class PathWinding(FrozenModel):
    from_point: Label
    to_point: Label
    k: int


class BunchMember(FrozenModel):
    boundary_point: Label
    side: Literal["-", "+"]


class Bunch(FrozenModel):
    id: Label
    members: tuple[BunchMember, ...]
    degree: int = Field(ge=1)


class AttractorRecord(FrozenModel):
    id: Label
    kind: Literal["attractor", "repeller"]
    num_periodic_components: int = Field(ge=1)
    rank: int = Field(ge=1)
    automorphism: Automorphism
    boundary_points: tuple[Label, ...] = ()
    bunches: tuple[Bunch, ...] = ()


class Scheme(FrozenModel):
    components: tuple[TorusComponent, ...]
    s_curves: tuple[SeparatrixCurve, ...]
    u_curves: tuple[SeparatrixCurve, ...]
    s_boundary_curves: tuple[BoundaryCurve, ...] = Field(alias="s_boundary")
    u_boundary_curves: tuple[BoundaryCurve, ...] = Field(alias="u_boundary")
    tangency_families: tuple[TangencyFamily, ...] = Field(alias="tangencies")
    windings: tuple[PathWinding, ...]
    attractors: tuple[AttractorRecord, ...]
    k_f: int = Field(ge=1)

    # Lookups by label
    def component_index(self) -> dict[str, TorusComponent]:
        return {c.id: c for c in self.components}

    def curves(self) -> tuple[SeparatrixCurve, ...]:
        return self.s_curves + self.u_curves

    def curve_index(self) -> dict[str, SeparatrixCurve]:
        return {c.id: c for c in self.curves()}

    def boundary_curves(self) -> tuple[BoundaryCurve, ...]:
        return self.s_boundary_curves + self.u_boundary_curves

    def boundary_curve_index(self) -> dict[str, BoundaryCurve]:
        return {c.id: c for c in self.boundary_curves()}

    def family_index(self) -> dict[str, TangencyFamily]:
        return {f.id: f for f in self.tangency_families}

    def point_index(self) -> dict[str, tuple[TangencyFamily, TangencyPoint]]:
        return {p.id: (f, p) for f in self.tangency_families for p in f.points}

    def attractor_index(self) -> dict[str, AttractorRecord]:
        return {a.id: a for a in self.attractors}

    def saddles(self, kind: Literal["stable", "unstable"]) -> list[str]:
        curves = self.s_curves if kind == "stable" else self.u_curves
        return sorted({c.saddle for c in curves})

    def winding(self, from_point: str, to_point: str) -> Optional[int]:
        """
        Winding of the canonical path between two points: a stored entry, or
        the negated reverse entry; a point to itself is 0.
        """
        if from_point == to_point:
            return 0
        reverse = None
        for w in self.windings:
            if w.from_point == from_point and w.to_point == to_point:
                return w.k
            if w.from_point == to_point and w.to_point == from_point:
                reverse = -w.k
        return reverse


class MValue(FrozenModel):
    from_point: Label
    to_point: Label
    m: int


class AttractorMap(FrozenModel):
    source: Label
    target: Label
    psi: Optional[Automorphism] = None
    psi_inv: Optional[Automorphism] = None
    point_map: dict[Label, Label] = Field(default_factory=dict)

    @field_serializer("point_map")
    def _sorted_point_map(self, value: dict[str, str]) -> dict[str, str]:
        return dict(sorted(value.items()))


class Certificate(FrozenModel):
    component_map: dict[Label, Label]
    basis_changes: dict[Label, IntMatrix]
    curve_map: dict[Label, Label]
    boundary_curve_map: dict[Label, Label]
    tangency_map: dict[Label, Label]
    point_map: dict[Label, Label]
    m_values: tuple[MValue, ...] = ()
    attractor_maps: tuple[AttractorMap, ...] = ()

    @field_serializer(
        "component_map", "basis_changes", "curve_map",
        "boundary_curve_map", "tangency_map", "point_map",
    )
    def _sorted_map(self, value: dict[str, Any]) -> dict[str, Any]:
        return dict(sorted(value.items()))

    def m_lookup(self, from_point: str, to_point: str) -> Optional[int]:
        for entry in self.m_values:
            if entry.from_point == from_point and entry.to_point == to_point:
                return entry.m
            if entry.from_point == to_point and entry.to_point == from_point:
                return -entry.m
        return None

    def attractor_map_for(self, source: str) -> Optional[AttractorMap]:
        return next((am for am in self.attractor_maps if am.source == source), None)


def identity_certificate(s: Scheme) -> Certificate:
    """Certificate matching a scheme with itself label for label."""
    def ident(labels) -> dict[str, str]:
        return {label: label for label in sorted(labels)}

    return Certificate(
        component_map=ident(c.id for c in s.components),
        basis_changes={c.id: IDENTITY for c in sorted(s.components, key=lambda c: c.id)},
        curve_map=ident(c.id for c in s.curves()),
        boundary_curve_map=ident(c.id for c in s.boundary_curves()),
        tangency_map=ident(f.id for f in s.tangency_families),
        point_map=ident(s.point_index()),
        m_values=(),
        attractor_maps=tuple(
            AttractorMap(
                source=a.id,
                target=a.id,
                psi=identity_automorphism(a.rank),
                psi_inv=identity_automorphism(a.rank),
                point_map=ident(a.boundary_points),
            )
            for a in sorted(s.attractors, key=lambda a: a.id)
        ),
    )


ConditionStatus = Literal["pass", "fail", "skipped-needs-certificate"]
CONDITION_IDS = ("1", "2", "3", "4a", "4b", "5", "6", "7")


class ConditionResult(FrozenModel):
    condition: str
    status: ConditionStatus
    diagnostics: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.status == "pass"


class Verdict(FrozenModel):
    equivalent: bool
    per_condition: dict[str, ConditionResult]
    witness: Optional[Certificate] = None

    @property
    def outcome(self) -> Literal["equivalent", "not-equivalent", "inconclusive"]:
        statuses = {r.status for r in self.per_condition.values()}
        if self.equivalent:
            return "equivalent"
        if "fail" in statuses:
            return "not-equivalent"
        return "inconclusive"

