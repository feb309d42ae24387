"""
Deterministic fixture builders: DA schemes, synthetic tangency families,
basis changes, separability facts and a small map spec with one tangency.
"""
import itertools
import random
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from pydantic import Field, field_validator, model_validator

from schemes.facts import BasicSet, Facts, SeparatrixEnd
from schemes.mapspec import MapSpec, SaddleChart, TangencyClaim, TransitionMap
from schemes.models import (
    AttractorRecord,
    BoundaryCurve,
    Certificate,
    FrozenModel,
    PathWinding,
    Scheme,
    SeparatrixCurve,
    TangencyFamily,
    TangencyPoint,
    TorusComponent,
    identity_certificate,
)
from services.free_groups import FreeGroupAut, Word, compose, is_automorphism_rank2, lift_matrix
from services.gl2z import IDENTITY, IntMatrix, apply_vector, conjugate, det, inverse, multiply, trace
from services.separability import enumerate_bunches
from utils.errors import FixtureError, NonHyperbolic
from utils.logging import get_logger

logger = get_logger(__name__)

CORPUS_MATRICES: tuple[IntMatrix, ...] = (
    ((1, 1), (0, 1)),
    ((0, 1), (1, 0)),
    ((2, 1), (1, 1)),
    ((1, 0), (-1, 1)),
    ((-1, 0), (0, 1)),
)


class DaParams(FrozenModel):
    matrix: IntMatrix
    tau_seed: float = Field(default=1.0, gt=0)
    lam: Optional[float] = Field(default=None, alias="lambda")
    mu: Optional[float] = None
    lift: Optional[FreeGroupAut] = None

    @field_validator("matrix")
    @classmethod
    def check_determinant(cls, v: IntMatrix) -> IntMatrix:
        if det(v) != 1:
            raise ValueError(f"DA matrix must have determinant 1, got {det(v)}")
        return v

    @model_validator(mode="after")
    def check_tangency_data(self) -> "DaParams":
        if (self.lam is None) != (self.mu is None):
            raise ValueError("lambda and mu must be given together")
        if self.lam is not None and not (0 < abs(self.lam) < 1 < abs(self.mu)):
            raise ValueError(f"0<|λ|<1<|μ| violated by lambda={self.lam}, mu={self.mu}")
        return self


def canonical_lift(a: IntMatrix) -> FreeGroupAut:
    """x0 -> x0^a x1^c, x1 -> x0^b x1^d when that is an automorphism, else a Nielsen lift."""
    (p, q), (r, s) = a
    phi = FreeGroupAut(rank=2, images=(
        Word.generator(0, p) * Word.generator(1, r),
        Word.generator(0, q) * Word.generator(1, s),
    ))
    if is_automorphism_rank2(phi):
        return phi
    return lift_matrix([list(row) for row in a])[0]


def _saddle_curves(saddle: str, kind: str, components: tuple[str, str], homotopy_class: tuple[int, int]) -> tuple[SeparatrixCurve, ...]:
    plus, minus = f"{saddle}+", f"{saddle}-"
    return (
        SeparatrixCurve(id=plus, kind=kind, saddle=saddle, component=components[0], homotopy_class=homotopy_class, partner=minus),
        SeparatrixCurve(id=minus, kind=kind, saddle=saddle, component=components[1], homotopy_class=homotopy_class, partner=plus),
    )


def build_da_scheme(p: DaParams) -> Scheme:
    """
    Scheme of a DA diffeomorphism built from the hyperbolic matrix p.matrix.

    Model: one orbit-space torus T1 with trivial induced action, one
    attractor L1 with s-boundary points p1, p2 forming a single bunch, and
    with lambda/mu given an extra saddle pair carrying one tangency point.

    Raises:
        NonHyperbolic: |trace| <= 2
    """
    a = p.matrix
    if abs(trace(a)) <= 2:
        raise NonHyperbolic(f"matrix {a} has trace {trace(a)}; a DA attractor needs |trace| > 2")

    record = AttractorRecord(
        id="L1",
        kind="attractor",
        num_periodic_components=1,
        rank=2,
        automorphism=p.lift or canonical_lift(a),
        boundary_points=("p1", "p2"),
    )
    record = record.model_copy(update={"bunches": tuple(enumerate_bunches(record, [["p1", "p2"]]))})
    boundary = tuple(
        BoundaryCurve(id=f"l_{point}", attractor="L1", boundary_point=point, component="T1", homotopy_class=(0, 1))
        for point in record.boundary_points
    )

    s_curves, u_curves, families = (), (), ()
    if p.lam is not None:
        s_curves = _saddle_curves("s1", "stable", ("T1", "T1"), (0, 1))
        u_curves = _saddle_curves("u1", "unstable", ("T1", "T1"), (1, 0))
        families = (TangencyFamily(
            id="H1", saddle_s="s1", saddle_u="u1", lam=p.lam, mu=p.mu,
            points=(TangencyPoint(id="a1", component="T1", host_curve="s1+", tau=p.tau_seed),),
        ),)

    return Scheme(
        components=(TorusComponent(id="T1", action_matrix=IDENTITY, image_component="T1"),),
        s_curves=s_curves,
        u_curves=u_curves,
        s_boundary_curves=boundary,
        u_boundary_curves=(),
        tangency_families=families,
        windings=(),
        attractors=(record,),
        k_f=1,
    )


def conjugated_da_params(p: DaParams, by: IntMatrix) -> DaParams:
    """Parameters for P A P^-1 whose lift is psi T psi^-1, psi lifting P."""
    psi, psi_inv = lift_matrix([list(row) for row in by])
    t = p.lift or canonical_lift(p.matrix)
    return p.model_copy(update={"matrix": conjugate(by, p.matrix), "lift": compose(compose(psi, t), psi_inv)})


def da_certificate(s1: Scheme, s2: Scheme, by: IntMatrix) -> Certificate:
    """Certificate between DA schemes built from A and P A P^-1."""
    psi, psi_inv = lift_matrix([list(row) for row in by])
    base = identity_certificate(s1)
    maps = tuple(am.model_copy(update={"psi": psi, "psi_inv": psi_inv}) for am in base.attractor_maps)
    if {a.id for a in s1.attractors} != {a.id for a in s2.attractors}:
        raise FixtureError("DA schemes must share attractor labels")
    return base.model_copy(update={"attractor_maps": maps})


def build_tangency_fixture(
    n_points: int,
    components: int = 1,
    lam: float = 0.5,
    mu: float = 2.0,
    tau_seed: float = 1.0,
    winding_pattern: Optional[Sequence[int]] = None,
    families: int = 1,
) -> Scheme:
    """
    Synthetic families H1..Hn with points placed round-robin on T1 (T2).

    Point i gets tau = tau_seed * |lambda/mu|^k_i for k_i from winding_pattern
    (all zero by default), and any two points sharing a component are joined
    by the winding k_j - k_i.
    """
    if n_points < 1 or components not in (1, 2) or families < 1:
        raise FixtureError(f"unsupported fixture shape: {n_points} points, {components} components, {families} families")
    pattern = list(winding_pattern) if winding_pattern is not None else [0] * n_points
    if len(pattern) != n_points:
        raise FixtureError(f"winding pattern has {len(pattern)} entries for {n_points} points")

    comps = ("T1", "T2")[:components]
    host_component = (comps[0], comps[-1])
    r = abs(lam / mu)
    s_curves, u_curves, fams, placed = [], [], [], []
    for j in range(1, families + 1):
        s_curves += _saddle_curves(f"s{j}", "stable", host_component, (0, 1))
        u_curves += _saddle_curves(f"u{j}", "unstable", (comps[0], comps[0]), (1, 0))
        points = []
        for i, k in enumerate(pattern):
            component = comps[i % components]
            host = f"s{j}+" if component == "T1" else f"s{j}-"
            points.append(TangencyPoint(id=f"H{j}.a{i}", component=component, host_curve=host, tau=tau_seed * r**k))
            placed.append((points[-1], k))
        fams.append(TangencyFamily(id=f"H{j}", saddle_s=f"s{j}", saddle_u=f"u{j}", lam=lam, mu=mu, points=tuple(points)))

    # every same-component pair, across families too
    windings = [
        PathWinding(from_point=p.id, to_point=q.id, k=kq - kp)
        for (p, kp), (q, kq) in itertools.combinations(placed, 2)
        if p.component == q.component
    ]

    return Scheme(
        components=tuple(TorusComponent(id=c, action_matrix=IDENTITY, image_component=c) for c in comps),
        s_curves=tuple(s_curves),
        u_curves=tuple(u_curves),
        s_boundary_curves=(),
        u_boundary_curves=(),
        tangency_families=tuple(fams),
        windings=tuple(windings),
        attractors=(),
        k_f=1,
    )


def change_basis(s: Scheme, p_by_component: dict[str, IntMatrix]) -> tuple[Scheme, Certificate]:
    """
    Rewrite a scheme in new torus bases: A'_i = P_pi(i) A_i P_i^-1 and every
    curve class v in component i becomes P_i v. Components left out keep
    their basis.
    """
    basis = {c.id: p_by_component.get(c.id, IDENTITY) for c in s.components}
    for cid, p in basis.items():
        if det(p) not in (1, -1):
            raise FixtureError(f"basis change for '{cid}' is not unimodular")

    def moved(curve):
        return curve.model_copy(update={"homotopy_class": apply_vector(basis[curve.component], curve.homotopy_class)})

    components = tuple(
        c.model_copy(update={"action_matrix": multiply(multiply(basis[c.image_component], c.action_matrix), inverse(basis[c.id]))})
        for c in s.components
    )
    image = s.model_copy(update={
        "components": components,
        "s_curves": tuple(moved(c) for c in s.s_curves),
        "u_curves": tuple(moved(c) for c in s.u_curves),
        "s_boundary_curves": tuple(moved(c) for c in s.s_boundary_curves),
        "u_boundary_curves": tuple(moved(c) for c in s.u_boundary_curves),
    })
    cert = identity_certificate(s).model_copy(update={"basis_changes": basis})
    return image, cert


def rescale_tau(s: Scheme, point: str, factor: float) -> Scheme:
    if point not in s.point_index():
        raise FixtureError(f"unknown tangency point '{point}'")
    families = tuple(
        f.model_copy(update={"points": tuple(
            p.model_copy(update={"tau": p.tau * factor}) if p.id == point else p for p in f.points
        )})
        for f in s.tangency_families
    )
    return s.model_copy(update={"tangency_families": families})


def build_da_facts(p: DaParams) -> Facts:
    """Separable case: both free separatrices land on sources, no heteroclinic points."""
    record = build_da_scheme(p).attractors[0]
    return Facts(
        roster=(
            BasicSet(id="L1", kind="attractor"),
            BasicSet(id="alpha1", kind="source"),
            BasicSet(id="alpha2", kind="source"),
        ),
        intersections=(),
        complete=True,
        attractors=(record,),
        ends={"L1": (
            SeparatrixEnd(boundary_point="p1", landing="source", target="alpha1"),
            SeparatrixEnd(boundary_point="p2", landing="source", target="alpha2"),
        )},
        closure={"L1": ("alpha1", "alpha2")},
        pairings={"L1": (("p1", "p2"),)},
    )


def build_nonseparable_facts() -> Facts:
    """One free separatrix lands on a saddle instead of a source."""
    record = build_da_scheme(DaParams(matrix=((2, 1), (1, 1)))).attractors[0]
    return Facts(
        roster=(
            BasicSet(id="L1", kind="attractor"),
            BasicSet(id="alpha", kind="source"),
            BasicSet(id="sigma", kind="saddle"),
        ),
        intersections=(),
        complete=True,
        attractors=(record,),
        ends={"L1": (
            SeparatrixEnd(boundary_point="p1", landing="saddle", target="sigma"),
            SeparatrixEnd(boundary_point="p2", landing="source", target="alpha"),
        )},
        closure={"L1": ("alpha", "sigma")},
        pairings={"L1": (("p1", "p2"),)},
    )


def build_tangency_mapspec(tau: Fraction = Fraction(1), mu: Fraction = Fraction(2),
                           lam: Fraction = Fraction(1, 2), order: int = 2) -> MapSpec:
    """
    Saddles "s" and "u" with one transition g: chart of s -> chart of u,
    xi = 1/2 + (y - 1), eta = tau x + (y - 1)^order, touching the x-axis of u
    at (1/2, 0) with contact order `order`.
    """
    if order < 1:
        raise FixtureError("order must be at least 1")
    eta = [[Fraction(comb(order, j)) * (-1) ** (order - j) for j in range(order + 1)], [Fraction(tau)]]
    xi = [[Fraction(-1, 2), Fraction(1)]]
    g = TransitionMap(id="g", source="s", target="u", xi=tuple(map(tuple, xi)), eta=tuple(map(tuple, eta)),
                      a_s=(Fraction(0), Fraction(1)))
    return MapSpec(
        saddles=(SaddleChart(saddle="s", mu=mu, lam=lam), SaddleChart(saddle="u", mu=mu, lam=lam)),
        transitions=(g,),
        tangency_points=(TangencyClaim(transition="g", point=(Fraction(1, 2), Fraction(0)), one_sided=order % 2 == 0),),
    )


def fixture_corpus(seed: int = 0) -> list[Scheme]:
    """At least ten valid schemes, reproducible from the seed."""
    rng = random.Random(seed)
    base = DaParams(matrix=((2, 1), (1, 1)))
    corpus = [
        build_da_scheme(base),
        build_da_scheme(DaParams(matrix=((3, 1), (2, 1)))),
        build_da_scheme(base.model_copy(update={"lam": 0.5, "mu": 2.0})),
        build_da_scheme(conjugated_da_params(base, ((1, 1), (0, 1)))),
        build_tangency_fixture(2, 1),
        build_tangency_fixture(2, 1, winding_pattern=(0, 3)),
        build_tangency_fixture(2, 2, lam=0.25, mu=4.0),
    ]
    for _ in range(4):
        n = rng.randint(2, 4)
        pattern = [rng.randint(-3, 3) for _ in range(n)]
        lam = rng.choice((0.5, 0.25, 0.4))
        scheme = build_tangency_fixture(n, rng.choice((1, 2)), lam=lam, mu=rng.choice((2.0, 2.5, 3.0)),
                                        tau_seed=rng.choice((1.0, -0.5, 2.0)), winding_pattern=pattern,
                                        families=rng.randint(1, 2))
        p = {c.id: rng.choice(CORPUS_MATRICES) for c in scheme.components}
        corpus.append(change_basis(scheme, p)[0])
    logger.debug(f"Built fixture corpus of {len(corpus)} schemes from seed {seed}")
    return corpus
