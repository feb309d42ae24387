"""
Declared combinatorial facts about basic sets and their invariant manifolds:
the roster, intersection table, separatrix landings, closure sets and bunch
pairings consumed by the separability checks.
"""
from typing import Literal, Optional, Union

from pydantic import Field, model_validator

from schemes.models import AttractorRecord, FrozenModel, Label

BasicSetKind = Literal["sink", "saddle", "source", "attractor", "repeller"]
TRIVIAL_KINDS = frozenset({"sink", "saddle", "source"})

CheckStatus = Literal["pass", "fail", "undetermined"]


class BasicSet(FrozenModel):
    id: Label
    kind: BasicSetKind
    period: int = Field(default=1, ge=1)

    @property
    def trivial(self) -> bool:
        return self.kind in TRIVIAL_KINDS


class ManifoldRef(FrozenModel):
    basic_set: Label
    manifold: Literal["s", "u"]
    point: Optional[Label] = None


class IntersectionEntry(FrozenModel):
    """One orbit family of W^u(source) meeting W^s(target)."""
    source: ManifoldRef
    target: ManifoldRef
    transversality: Literal["transverse", "tangent"] = "transverse"
    order: Optional[int] = Field(default=None, ge=2)
    orbit_count: Union[int, Literal["infinite"]] = 1
    side_separated: Optional[bool] = None

    @property
    def tangent(self) -> bool:
        return self.transversality == "tangent"

    @property
    def finite(self) -> bool:
        return self.orbit_count != "infinite"


class SeparatrixEnd(FrozenModel):
    boundary_point: Label
    landing: Literal["source", "sink", "saddle", "nontrivial", "unknown"]
    target: Optional[Label] = None


class IntersectionTable(FrozenModel):
    entries: tuple[IntersectionEntry, ...] = ()
    complete: bool = False


class Facts(FrozenModel):
    roster: tuple[BasicSet, ...]
    intersections: tuple[IntersectionEntry, ...] = ()
    complete: bool = False
    attractors: tuple[AttractorRecord, ...] = ()
    ends: dict[Label, tuple[SeparatrixEnd, ...]] = Field(default_factory=dict)
    closure: dict[Label, tuple[Label, ...]] = Field(default_factory=dict)
    pairings: dict[Label, tuple[tuple[Label, ...], ...]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_references(self) -> "Facts":
        known = {b.id for b in self.roster}
        for entry in self.intersections:
            for ref in (entry.source, entry.target):
                if ref.basic_set not in known:
                    raise ValueError(f"intersection references unknown basic set '{ref.basic_set}'")
        for record in self.attractors:
            if record.id not in known:
                raise ValueError(f"attractor '{record.id}' is missing from the roster")
        return self

    @property
    def table(self) -> IntersectionTable:
        return IntersectionTable(entries=self.intersections, complete=self.complete)

    def roster_index(self) -> dict[str, BasicSet]:
        return {b.id: b for b in self.roster}


class CheckResult(FrozenModel):
    status: CheckStatus
    diagnostics: tuple[str, ...] = ()


class SeparabilityReport(FrozenModel):
    attractor: Label
    separable: Optional[bool]
    conditions: dict[str, CheckResult]
    y_set: tuple[Label, ...] = ()
    warnings: tuple[str, ...] = ()


class CriteriaReport(FrozenModel):
    criteria: dict[str, CheckResult]

    @property
    def finite_moduli(self) -> Optional[bool]:
        statuses = {r.status for r in self.criteria.values()}
        if "fail" in statuses:
            return False
        if statuses == {"pass"}:
            return True
        return None


class SaddleClassification(FrozenModel):
    omega_s: tuple[Label, ...]
    omega_u: tuple[Label, ...]
    violations: tuple[str, ...] = ()
