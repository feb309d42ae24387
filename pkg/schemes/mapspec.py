"""
Numeric description of a diffeomorphism near its saddles: linearized charts
plus polynomial transition maps between them.

Polynomials are coefficient matrices ``[[c00, c01], [c10, c11], ...]``: the
row is the x-degree, the column the y-degree. Coefficients are exact rationals.
"""
from fractions import Fraction
from typing import Optional

from pydantic import Field, field_validator, model_validator

from schemes.models import FrozenModel, Label, Rational

Polynomial = tuple[tuple[Rational, ...], ...]


class SaddleChart(FrozenModel):
    saddle: Label
    period: int = Field(default=1, ge=1)
    mu: Rational
    lam: Rational = Field(alias="lambda")

    @model_validator(mode="after")
    def check_eigenvalues(self) -> "SaddleChart":
        if not (0 < abs(self.lam) < 1 < abs(self.mu)):
            raise ValueError(f"saddle '{self.saddle}' violates 0<|λ|<1<|μ|")
        return self


class TransitionMap(FrozenModel):
    id: Label
    source: Label
    target: Label
    xi: Polynomial
    eta: Polynomial
    a_s: tuple[Rational, Rational]

    @field_validator("xi", "eta")
    @classmethod
    def check_nonempty(cls, v: Polynomial) -> Polynomial:
        if not v or not any(v):
            raise ValueError("polynomial needs at least one coefficient")
        return v


class TangencyClaim(FrozenModel):
    transition: Label
    point: Optional[tuple[Rational, Rational]] = None
    one_sided: Optional[bool] = None


class MapSpec(FrozenModel):
    saddles: tuple[SaddleChart, ...]
    transitions: tuple[TransitionMap, ...]
    tangency_points: tuple[TangencyClaim, ...] = ()

    @model_validator(mode="after")
    def check_references(self) -> "MapSpec":
        saddles = {c.saddle for c in self.saddles}
        for g in self.transitions:
            for label in (g.source, g.target):
                if label not in saddles:
                    raise ValueError(f"transition '{g.id}' references unknown saddle '{label}'")
        transitions = {g.id for g in self.transitions}
        for claim in self.tangency_points:
            if claim.transition not in transitions:
                raise ValueError(f"tangency claim references unknown transition '{claim.transition}'")
        return self

    def chart(self, saddle: str) -> SaddleChart:
        return next(c for c in self.saddles if c.saddle == saddle)

    def transition(self, transition_id: str) -> TransitionMap:
        return next(g for g in self.transitions if g.id == transition_id)


def polynomial(rows: list[list[object]]) -> Polynomial:
    """Coefficient matrix from plain numbers or 'p/q' strings."""
    return tuple(tuple(Fraction(str(c)) if not isinstance(c, (int, Fraction)) else Fraction(c) for c in row) for row in rows)
