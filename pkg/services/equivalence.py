"""
Equivalence of schemes, condition by condition.

With a certificate every condition is verified directly. Without one a
bounded backtracking search looks for the component, curve, attractor,
family and point matchings, basis changes and integers m; the conjugating
free-group automorphisms are not searched, so condition 7 only passes when
the identity substitution already works.

Windings enter conditions 4a, 4b and 5 relative to the source scheme: the
image-path winding minus the source-path winding. With all source windings
zero this is the plain relation between a scheme and its image.
"""
import itertools
import math
from collections import Counter
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np
import sympy as sp
from pydantic import BaseModel, ConfigDict, Field

from config import settings
from schemes.models import (
    CONDITION_IDS,
    AttractorMap,
    AttractorRecord,
    Certificate,
    ConditionResult,
    MValue,
    Scheme,
    TangencyFamily,
    TangencyPoint,
    Verdict,
)
from schemes.validation import validate_scheme
from services.free_groups import (
    FreeGroupAut,
    abelianization,
    compose,
    conjugacy_failures,
    identity_automorphism,
    verify_conjugacy,
)
from services.gl2z import (
    IntMatrix,
    apply_vector,
    as_matrix,
    conjugator_candidates,
    det,
    inverse,
    is_unimodular,
    multiply,
    same_up_to_sign,
)
from services.moduli import log_ratio
from utils.errors import RankMismatch, ValidationFailed
from utils.logging import get_logger

logger = get_logger(__name__)


class CheckOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default_factory=lambda: settings.REL_TOL, gt=0)
    matrix_bound: int = Field(default_factory=lambda: settings.MATRIX_BOUND, ge=1)
    m_bound: int = Field(default_factory=lambda: settings.M_BOUND, ge=1)
    orientation_preserving: bool = Field(default_factory=lambda: settings.ORIENTATION_PRESERVING)


def _result(condition: str, diagnostics: Sequence[str]) -> ConditionResult:
    if diagnostics:
        return ConditionResult(condition=condition, status="fail", diagnostics=tuple(sorted(set(diagnostics))))
    return ConditionResult(condition=condition, status="pass")


def _bijection_problems(mapping: dict[str, str], domain: Sequence[str], codomain: Sequence[str], name: str) -> list[str]:
    problems = []
    missing = sorted(set(domain) - set(mapping))
    extra = sorted(set(mapping) - set(domain))
    dangling = sorted({v for v in mapping.values() if v not in set(codomain)})
    repeated = sorted(v for v, n in Counter(mapping.values()).items() if n > 1)
    uncovered = sorted(set(codomain) - set(mapping.values()))
    if missing:
        problems.append(f"{name} misses {missing}")
    if extra:
        problems.append(f"{name} maps unknown labels {extra}")
    if dangling:
        problems.append(f"{name} targets unknown labels {dangling}")
    if repeated:
        problems.append(f"{name} is not injective at {repeated}")
    if uncovered and not dangling:
        problems.append(f"{name} does not reach {uncovered}")
    return problems


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def check_condition1(s1: Scheme, s2: Scheme, cert: Certificate, opts: Optional[CheckOptions] = None) -> ConditionResult:
    """Component bijection intertwines the induced maps, P_pi(i) A_i = A'_beta(i) P_i."""
    opts = opts or CheckOptions()
    comps1, comps2 = s1.component_index(), s2.component_index()
    beta = cert.component_map
    diags = _bijection_problems(beta, list(comps1), list(comps2), "component_map")
    if diags:
        return _result("1", diags)

    for cid in sorted(comps1):
        c = comps1[cid]
        p = cert.basis_changes.get(cid)
        if p is None:
            diags.append(f"missing basis change for component '{cid}'")
            continue
        if not is_unimodular(p, opts.orientation_preserving):
            need = "+1" if opts.orientation_preserving else "+-1"
            diags.append(f"basis change of '{cid}' has determinant {det(p)}, expected {need}")
        c2 = comps2[beta[cid]]
        if beta[c.image_component] != c2.image_component:
            diags.append(f"component map does not intertwine the permutations at '{cid}'")
            continue
        p_image = cert.basis_changes.get(c.image_component)
        if p_image is None:
            continue
        if multiply(p_image, c.action_matrix) != multiply(c2.action_matrix, p):
            diags.append(f"P_{c.image_component} A_{cid} != A'_{c2.id} P_{cid}")
    return _result("1", diags)


def _curve_matching_problems(
    pairs: list[tuple[object, object]],
    cert: Certificate,
    group_of,
    name: str,
) -> list[str]:
    diags = []
    grouping: dict[object, object] = {}
    for c, c2 in pairs:
        if cert.component_map.get(c.component) != c2.component:
            diags.append(f"{name} sends '{c.id}' into component '{c2.component}', not the image of '{c.component}'")
        p = cert.basis_changes.get(c.component)
        if p is None:
            diags.append(f"missing basis change for component '{c.component}'")
        elif not same_up_to_sign(apply_vector(p, c.homotopy_class), c2.homotopy_class):
            diags.append(f"P{tuple(c.homotopy_class)} = {apply_vector(p, c.homotopy_class)} is not +-{tuple(c2.homotopy_class)} for '{c.id}'")
        for key, key2 in zip(group_of(c), group_of(c2)):
            previous = grouping.setdefault(key, key2)
            if previous != key2:
                diags.append(f"{name} splits {key} between {previous} and {key2}")
    images = Counter(grouping.values())
    for key2, count in images.items():
        if count > 1:
            diags.append(f"{name} merges {count} groups into {key2}")
    return diags


def check_condition2_and_6(s1: Scheme, s2: Scheme, cert: Certificate) -> tuple[ConditionResult, ConditionResult]:
    """Separatrix curves (condition 2) and boundary curves (condition 6) correspond."""
    curves1, curves2 = s1.curve_index(), s2.curve_index()
    diags2 = _bijection_problems(cert.curve_map, list(curves1), list(curves2), "curve_map")
    pairs = []
    for cid in sorted(curves1):
        c2 = curves2.get(cert.curve_map.get(cid, ""))
        if c2 is None:
            continue
        c = curves1[cid]
        if c.kind != c2.kind:
            diags2.append(f"curve_map sends {c.kind} curve '{cid}' to {c2.kind} curve '{c2.id}'")
        pairs.append((c, c2))
    diags2 += _curve_matching_problems(pairs, cert, lambda c: [(c.kind, c.saddle)], "curve_map")

    b1, b2 = s1.boundary_curve_index(), s2.boundary_curve_index()
    s_side1 = {c.id for c in s1.s_boundary_curves}
    s_side2 = {c.id for c in s2.s_boundary_curves}
    diags6 = _bijection_problems(cert.boundary_curve_map, list(b1), list(b2), "boundary_curve_map")
    pairs = []
    for cid in sorted(b1):
        c2 = b2.get(cert.boundary_curve_map.get(cid, ""))
        if c2 is None:
            continue
        if (cid in s_side1) != (c2.id in s_side2):
            diags6.append(f"boundary_curve_map swaps stable and unstable boundary curves at '{cid}'")
        pairs.append((b1[cid], c2))
    diags6 += _curve_matching_problems(
        pairs, cert,
        lambda c: [("attractor", c.attractor), ("point", c.attractor, c.boundary_point)],
        "boundary_curve_map",
    )
    return _result("2", diags2), _result("6", diags6)


def _structure_problems(s1: Scheme, s2: Scheme, cert: Certificate) -> list[str]:
    fam1, fam2 = s1.family_index(), s2.family_index()
    pts1, pts2 = s1.point_index(), s2.point_index()
    diags = _bijection_problems(cert.tangency_map, list(fam1), list(fam2), "tangency_map")
    diags += _bijection_problems(cert.point_map, list(pts1), list(pts2), "point_map")
    for pid in sorted(pts1):
        family, point = pts1[pid]
        target = pts2.get(cert.point_map.get(pid, ""))
        if target is None:
            continue
        family2, point2 = target
        if cert.tangency_map.get(family.id) != family2.id:
            diags.append(f"point '{pid}' leaves the image of family '{family.id}'")
        if cert.curve_map.get(point.host_curve) != point2.host_curve:
            diags.append(f"point '{pid}' leaves the image of its host curve '{point.host_curve}'")
    return diags


def check_condition3(s1: Scheme, s2: Scheme, cert: Certificate, tol: float) -> ConditionResult:
    """Matched families have equal ln|lambda| / ln|mu|."""
    diags = _structure_problems(s1, s2, cert)
    fam2 = s2.family_index()
    for family in sorted(s1.tangency_families, key=lambda f: f.id):
        other = fam2.get(cert.tangency_map.get(family.id, ""))
        if other is None:
            continue
        r1, r2 = log_ratio(family.lam, family.mu), log_ratio(other.lam, other.mu)
        if not math.isclose(r1, r2, rel_tol=tol):
            diags.append(f"log ratio of '{family.id}' is {r1!r}, of '{other.id}' {r2!r}")
    return _result("3", diags)


def _family_pairs(family: TangencyFamily, same_component: bool) -> list[tuple[TangencyPoint, TangencyPoint]]:
    points = sorted(family.points, key=lambda p: p.id)
    return [
        (a, b) for a, b in itertools.combinations(points, 2)
        if (a.component == b.component) == same_component
    ]


def _normalised(tau1: float, tau2: float, mu: float, k: int, r: float) -> float:
    """Logarithm of (r^k |tau2/tau1|)^(1/ln|mu|)."""
    return (k * math.log(r) + math.log(abs(tau2 / tau1))) / math.log(abs(mu))


def _image_points(s2: Scheme, cert: Certificate, a: TangencyPoint, b: TangencyPoint):
    pts2 = s2.point_index()
    first, second = pts2.get(cert.point_map.get(a.id, "")), pts2.get(cert.point_map.get(b.id, ""))
    if first is None or second is None:
        return None
    return first[0], first[1], second[1]


def _condition4a_problems(s1: Scheme, s2: Scheme, cert: Certificate, family: TangencyFamily,
                          pairs: list[tuple[TangencyPoint, TangencyPoint]], tol: float) -> list[str]:
    diags = []
    r = abs(family.lam / family.mu)
    for a, b in pairs:
        image = _image_points(s2, cert, a, b)
        if image is None:
            diags.append(f"points '{a.id}', '{b.id}' have no images")
            continue
        family2, a2, b2 = image
        k_src, k_img = s1.winding(a.id, b.id), s2.winding(a2.id, b2.id)
        if k_src is None or k_img is None:
            missing = f"'{a.id}'->'{b.id}'" if k_src is None else f"'{a2.id}'->'{b2.id}'"
            diags.append(f"no winding stored for {missing}")
            continue
        lhs = _normalised(a.tau, b.tau, family.mu, k_src, r)
        rhs = _normalised(a2.tau, b2.tau, family2.mu, k_img, abs(family2.lam / family2.mu))
        if not _close(lhs, rhs, tol):
            diags.append(f"'{a.id}', '{b.id}': invariant exp({lhs!r}) vs image exp({rhs!r})")
    return diags


def check_condition4a(s1: Scheme, s2: Scheme, cert: Certificate, tol: float) -> ConditionResult:
    """Same-component tau pairs agree up to the winding of the image path."""
    diags = []
    for family in sorted(s1.tangency_families, key=lambda f: f.id):
        diags += _condition4a_problems(s1, s2, cert, family, _family_pairs(family, True), tol)
    return _result("4a", diags)


def _m_candidates(m_bound: int) -> Iterator[int]:
    yield 0
    for m in range(1, m_bound + 1):
        yield m
        yield -m


def _solve_m(s2: Scheme, cert: Certificate, family: TangencyFamily, a: TangencyPoint, b: TangencyPoint,
             tol: float, m_bound: int, given: Optional[int]) -> tuple[Optional[int], Optional[str]]:
    image = _image_points(s2, cert, a, b)
    if image is None:
        return None, f"points '{a.id}', '{b.id}' have no images"
    family2, a2, b2 = image
    lhs = _normalised(a.tau, b.tau, family.mu, 0, 1.0)
    base = _normalised(a2.tau, b2.tau, family2.mu, 0, 1.0)
    step = math.log(abs(family2.lam / family2.mu)) / math.log(abs(family2.mu))
    if given is not None:
        if _close(lhs, base + given * step, tol):
            return given, None
        return None, f"'{a.id}', '{b.id}': certificate m = {given} does not satisfy the relation"
    for m in _m_candidates(m_bound):
        if _close(lhs, base + m * step, tol):
            return m, None
    return None, f"'{a.id}', '{b.id}': no m in bound {m_bound}"


def solve_condition4b(s1: Scheme, s2: Scheme, cert: Certificate, tol: float, m_bound: int
                      ) -> tuple[ConditionResult, dict[tuple[str, str], int]]:
    """Condition 4b plus every m it had to search for (keyed by source point pair)."""
    diags, found = [], {}
    for family in sorted(s1.tangency_families, key=lambda f: f.id):
        for a, b in _family_pairs(family, False):
            given = cert.m_lookup(a.id, b.id)
            m, problem = _solve_m(s2, cert, family, a, b, tol, m_bound, given)
            if problem:
                diags.append(problem)
            elif given is None:
                found[(a.id, b.id)] = m
    return _result("4b", diags), found


def check_condition4b(s1: Scheme, s2: Scheme, cert: Certificate, tol: float, m_bound: int) -> ConditionResult:
    return solve_condition4b(s1, s2, cert, tol, m_bound)[0]


def _m_table(s1: Scheme, cert: Certificate, extra: dict[tuple[str, str], int]) -> dict[tuple[str, str], int]:
    table = {}
    for family in s1.tangency_families:
        for a, b in _family_pairs(family, False):
            m = cert.m_lookup(a.id, b.id)
            if m is None:
                m = extra.get((a.id, b.id))
            if m is not None:
                table[(a.id, b.id)] = m
                table[(b.id, a.id)] = -m
    return table


def check_condition5(s1: Scheme, s2: Scheme, cert: Certificate,
                     found: Optional[dict[tuple[str, str], int]] = None) -> ConditionResult:
    """The integers m of different point pairs over the same two components are consistent."""
    m = _m_table(s1, cert, found or {})
    points = s1.point_index()
    pm = cert.point_map
    diags = []
    for (a1, a2), (b1, b2) in itertools.permutations(sorted(m), 2):
        if points[a1][1].component != points[b1][1].component or points[a2][1].component != points[b2][1].component:
            continue
        windings = (
            s1.winding(a1, b1), s1.winding(a2, b2),
            s2.winding(pm.get(a1, ""), pm.get(b1, "")), s2.winding(pm.get(a2, ""), pm.get(b2, "")),
        )
        if None in windings:
            diags.append(f"windings between ({a1}, {a2}) and ({b1}, {b2}) are not all stored")
            continue
        k11, k22, k11_img, k22_img = windings
        expected = m[(a1, a2)] - k11_img + k22_img + k11 - k22
        if m[(b1, b2)] != expected:
            diags.append(f"m({b1}, {b2}) = {m[(b1, b2)]}, expected {expected} from m({a1}, {a2}) = {m[(a1, a2)]}")
    for family in s1.tangency_families:
        for a, b in _family_pairs(family, False):
            if (a.id, b.id) not in m:
                diags.append(f"m({a.id}, {b.id}) is not fixed")
    return _result("5", diags)


def check_condition7(s1: Scheme, s2: Scheme, cert: Certificate) -> ConditionResult:
    """Attractor automorphisms are conjugate by the certified substitutions."""
    attractors2 = s2.attractor_index()
    b1, b2 = s1.boundary_curve_index(), s2.boundary_curve_index()
    diags, needs_certificate = [], []
    targets = Counter(am.target for am in cert.attractor_maps)
    for target, count in targets.items():
        if count > 1:
            diags.append(f"attractor '{target}' is the image of {count} attractors")
    for missing in sorted(set(attractors2) - set(targets)):
        diags.append(f"attractor '{missing}' of the second scheme is not matched")

    for record in sorted(s1.attractors, key=lambda a: a.id):
        am = cert.attractor_map_for(record.id)
        if am is None:
            diags.append(f"no attractor map for '{record.id}'")
            continue
        other = attractors2.get(am.target)
        if other is None:
            diags.append(f"attractor map of '{record.id}' targets unknown '{am.target}'")
            continue
        if record.kind != other.kind:
            diags.append(f"'{record.id}' is a {record.kind}, '{other.id}' a {other.kind}")
        if record.num_periodic_components != other.num_periodic_components:
            diags.append(f"k of '{record.id}' is {record.num_periodic_components}, of '{other.id}' {other.num_periodic_components}")
        if record.rank != other.rank:
            diags.append(f"rank mismatch: '{record.id}' has rank {record.rank}, '{other.id}' rank {other.rank}")
        elif am.psi is None or am.psi_inv is None:
            needs_certificate.append(record.id)
        else:
            try:
                diags += [f"'{record.id}': {d}" for d in conjugacy_failures(record.automorphism, other.automorphism, am.psi, am.psi_inv)]
            except RankMismatch as e:
                diags.append(f"'{record.id}': {e}")

        diags += _bijection_problems(am.point_map, record.boundary_points, other.boundary_points,
                                     f"boundary point map of '{record.id}'")
        for curve in sorted((c for c in b1.values() if c.attractor == record.id), key=lambda c: c.id):
            image = b2.get(cert.boundary_curve_map.get(curve.id, ""))
            expected = am.point_map.get(curve.boundary_point)
            if image is None or image.attractor != other.id or image.boundary_point != expected:
                diags.append(f"boundary curve of '{curve.boundary_point}' does not follow the boundary point map")

    if diags:
        return _result("7", diags)
    if needs_certificate:
        return ConditionResult(
            condition="7",
            status="skipped-needs-certificate",
            diagnostics=tuple(f"no conjugating automorphism given for '{a}'" for a in needs_certificate),
        )
    return _result("7", [])


def verify_certificate(s1: Scheme, s2: Scheme, cert: Certificate, opts: Optional[CheckOptions] = None
                       ) -> tuple[dict[str, ConditionResult], Certificate]:
    """Check all conditions; returns the results and the certificate with searched m values added."""
    opts = opts or CheckOptions()
    results = {"1": check_condition1(s1, s2, cert, opts)}
    results["2"], results["6"] = check_condition2_and_6(s1, s2, cert)
    results["3"] = check_condition3(s1, s2, cert, opts.rel_tol)
    results["4a"] = check_condition4a(s1, s2, cert, opts.rel_tol)
    results["4b"], found = solve_condition4b(s1, s2, cert, opts.rel_tol, opts.m_bound)
    results["5"] = check_condition5(s1, s2, cert, found)
    results["7"] = check_condition7(s1, s2, cert)
    completed = cert
    if found:
        extra = tuple(MValue(from_point=a, to_point=b, m=m) for (a, b), m in sorted(found.items()))
        completed = cert.model_copy(update={"m_values": tuple(cert.m_values) + extra})
    return {c: results[c] for c in CONDITION_IDS}, completed


@lru_cache(maxsize=256)
def abelianization_invariants(phi: FreeGroupAut) -> tuple[int, ...]:
    """Characteristic polynomial coefficients of the abelianized action."""
    x = sp.Symbol("x")
    return tuple(int(c) for c in sp.Matrix(abelianization(phi)).charpoly(x).all_coeffs())


def invert_certificate(cert: Certificate) -> Certificate:
    """Certificate for the reverse direction of an equivalence."""
    def flip(mapping: dict[str, str]) -> dict[str, str]:
        return {v: k for k, v in mapping.items()}

    return Certificate(
        component_map=flip(cert.component_map),
        basis_changes={cert.component_map[c]: inverse(p) for c, p in cert.basis_changes.items() if c in cert.component_map},
        curve_map=flip(cert.curve_map),
        boundary_curve_map=flip(cert.boundary_curve_map),
        tangency_map=flip(cert.tangency_map),
        point_map=flip(cert.point_map),
        m_values=tuple(
            MValue(from_point=cert.point_map[v.from_point], to_point=cert.point_map[v.to_point], m=-v.m)
            for v in cert.m_values
        ),
        attractor_maps=tuple(
            AttractorMap(source=am.target, target=am.source, psi=am.psi_inv, psi_inv=am.psi, point_map=flip(am.point_map))
            for am in cert.attractor_maps
        ),
    )


def compose_certificates(c12: Certificate, c23: Certificate) -> Certificate:
    """Certificate for s1 -> s3 from certificates for s1 -> s2 and s2 -> s3."""
    def chain(first: dict[str, str], second: dict[str, str]) -> dict[str, str]:
        return {k: second[v] for k, v in first.items() if v in second}

    basis = {}
    for c, p in c12.basis_changes.items():
        middle = c12.component_map.get(c)
        if middle in c23.basis_changes:
            basis[c] = multiply(c23.basis_changes[middle], p)
    m_values = []
    for v in c12.m_values:
        second = c23.m_lookup(c12.point_map[v.from_point], c12.point_map[v.to_point])
        if second is not None:
            m_values.append(MValue(from_point=v.from_point, to_point=v.to_point, m=v.m + second))
    attractor_maps = []
    for am in c12.attractor_maps:
        nxt = c23.attractor_map_for(am.target)
        if nxt is None:
            continue
        psi = psi_inv = None
        if None not in (am.psi, am.psi_inv, nxt.psi, nxt.psi_inv):
            psi, psi_inv = compose(nxt.psi, am.psi), compose(am.psi_inv, nxt.psi_inv)
        attractor_maps.append(AttractorMap(
            source=am.source, target=nxt.target, psi=psi, psi_inv=psi_inv,
            point_map=chain(am.point_map, nxt.point_map),
        ))
    return Certificate(
        component_map=chain(c12.component_map, c23.component_map),
        basis_changes=basis,
        curve_map=chain(c12.curve_map, c23.curve_map),
        boundary_curve_map=chain(c12.boundary_curve_map, c23.boundary_curve_map),
        tangency_map=chain(c12.tangency_map, c23.tangency_map),
        point_map=chain(c12.point_map, c23.point_map),
        m_values=tuple(m_values),
        attractor_maps=tuple(attractor_maps),
    )


def _cycles(s: Scheme) -> list[list[str]]:
    image = {c.id: c.image_component for c in s.components}
    seen, cycles = set(), []
    for start in sorted(image):
        cycle, current = [], start
        while current not in seen:
            seen.add(current)
            cycle.append(current)
            current = image[current]
        if cycle:
            cycles.append(cycle)
    return cycles


class _SearchState:
    """Staged backtracking search for a certificate; keeps the deepest failure."""

    # conditions settled once a stage has been passed
    SETTLED = {
        "components": (), "saddles": (), "attractors": (),
        "basis": ("1", "2", "6"), "families": ("3",), "points": ("4a",), "m": ("4b",), "relation": ("5",),
    }
    ORDER = ("components", "saddles", "attractors", "basis", "families", "points", "m", "relation")

    def __init__(self, s1: Scheme, s2: Scheme, opts: CheckOptions):
        self.s1, self.s2, self.opts = s1, s2, opts
        self.deepest: Optional[tuple[int, str, tuple[str, ...]]] = None

    def record(self, stage: str, condition: str, diagnostics: Sequence[str]) -> None:
        depth = self.ORDER.index(stage)
        if self.deepest is None or depth > self.deepest[0]:
            self.deepest = (depth, condition, tuple(diagnostics))
            logger.debug(f"Search failure at {stage}: condition {condition}: {list(diagnostics)}")

    def failure_results(self) -> dict[str, ConditionResult]:
        depth, condition, diagnostics = self.deepest
        settled = {c for stage in self.ORDER[:depth] for c in self.SETTLED[stage]}
        results = {}
        for cid in CONDITION_IDS:
            if cid == condition:
                results[cid] = ConditionResult(condition=cid, status="fail", diagnostics=diagnostics)
            elif cid in settled:
                results[cid] = ConditionResult(condition=cid, status="pass")
            else:
                results[cid] = ConditionResult(condition=cid, status="skipped-needs-certificate",
                                               diagnostics=("not reached by the search",))
        return results

    # components
    def component_maps(self) -> Iterator[dict[str, str]]:
        cycles1, cycles2 = _cycles(self.s1), _cycles(self.s2)

        def extend(i: int, used: frozenset, beta: dict[str, str]) -> Iterator[dict[str, str]]:
            if i == len(cycles1):
                yield dict(beta)
                return
            cycle = cycles1[i]
            for other in cycles2:
                if len(other) != len(cycle) or other[0] in used:
                    continue
                for shift in range(len(other)):
                    step = {c: other[(shift + j) % len(other)] for j, c in enumerate(cycle)}
                    yield from extend(i + 1, used | {other[0]}, {**beta, **step})

        produced = False
        for beta in extend(0, frozenset(), {}):
            produced = True
            yield beta
        if not produced:
            self.record("components", "1", ["no component bijection intertwines the induced permutations"])

    # separatrix curves, one saddle at a time
    def curve_maps(self, beta: dict[str, str]) -> Iterator[dict[str, str]]:
        saddles1 = [(kind, saddle) for kind in ("stable", "unstable") for saddle in self.s1.saddles(kind)]
        by_saddle1 = self._curves_by_saddle(self.s1)
        by_saddle2 = self._curves_by_saddle(self.s2)

        def extend(i: int, used: frozenset, cmap: dict[str, str]) -> Iterator[dict[str, str]]:
            if i == len(saddles1):
                yield dict(cmap)
                return
            kind, saddle = saddles1[i]
            mine = by_saddle1[(kind, saddle)]
            for saddle2 in self.s2.saddles(kind):
                if saddle2 in used:
                    continue
                theirs = by_saddle2[(kind, saddle2)]
                if len(theirs) != len(mine):
                    continue
                for order in itertools.permutations(theirs):
                    if all(beta[c.component] == c2.component for c, c2 in zip(mine, order)):
                        step = {c.id: c2.id for c, c2 in zip(mine, order)}
                        yield from extend(i + 1, used | {saddle2}, {**cmap, **step})

        produced = False
        if Counter(self._saddle_shape(self.s1)) == Counter(self._saddle_shape(self.s2)):
            for cmap in extend(0, frozenset(), {}):
                produced = True
                yield cmap
        if not produced:
            self.record("saddles", "2", ["no saddle matching is compatible with the component map"])

    @staticmethod
    def _curves_by_saddle(s: Scheme) -> dict[tuple[str, str], list]:
        grouped: dict[tuple[str, str], list] = {}
        for c in sorted(s.curves(), key=lambda c: c.id):
            grouped.setdefault((c.kind, c.saddle), []).append(c)
        return grouped

    @staticmethod
    def _saddle_shape(s: Scheme) -> list[tuple[str, int]]:
        return [(kind, len(curves)) for (kind, _), curves in _SearchState._curves_by_saddle(s).items()]

    # attractors with their boundary points
    def attractor_maps(self, beta: dict[str, str]) -> Iterator[tuple[dict[str, str], list[AttractorMap]]]:
        records1 = sorted(self.s1.attractors, key=lambda a: a.id)
        records2 = sorted(self.s2.attractors, key=lambda a: a.id)
        curve_of1 = {(c.attractor, c.boundary_point): c for c in self.s1.boundary_curves()}
        curve_of2 = {(c.attractor, c.boundary_point): c for c in self.s2.boundary_curves()}
        blocked_by_abelianization: set[str] = set()

        def point_maps(rec: AttractorRecord, other: AttractorRecord) -> Iterator[dict[str, str]]:
            bunches2 = {frozenset(m.boundary_point for m in b.members) for b in other.bunches}
            for order in itertools.permutations(other.boundary_points):
                pmap = dict(zip(rec.boundary_points, order))
                bunches1 = {frozenset(pmap[m.boundary_point] for m in b.members) for b in rec.bunches}
                if bunches1 != bunches2:
                    continue
                ok = True
                for p, p2 in pmap.items():
                    c, c2 = curve_of1.get((rec.id, p)), curve_of2.get((other.id, p2))
                    if (c is None) != (c2 is None) or (c is not None and beta[c.component] != c2.component):
                        ok = False
                        break
                if ok:
                    yield pmap

        def extend(i: int, used: frozenset, bmap: dict[str, str], maps: list[AttractorMap]):
            if i == len(records1):
                yield dict(bmap), list(maps)
                return
            rec = records1[i]
            for other in records2:
                if other.id in used:
                    continue
                if (rec.kind, rec.num_periodic_components, rec.rank, len(rec.boundary_points)) != \
                        (other.kind, other.num_periodic_components, other.rank, len(other.boundary_points)):
                    continue
                if abelianization_invariants(rec.automorphism) != abelianization_invariants(other.automorphism):
                    blocked_by_abelianization.add(rec.id)
                    continue
                for pmap in point_maps(rec, other):
                    step = {curve_of1[(rec.id, p)].id: curve_of2[(other.id, p2)].id
                            for p, p2 in pmap.items() if (rec.id, p) in curve_of1}
                    am = AttractorMap(source=rec.id, target=other.id, point_map=pmap)
                    yield from extend(i + 1, used | {other.id}, {**bmap, **step}, maps + [am])

        produced = False
        if len(records1) == len(records2):
            for found in extend(0, frozenset(), {}, []):
                produced = True
                yield found
        if not produced:
            if blocked_by_abelianization:
                self.record("attractors", "7", [
                    f"abelianized automorphism of '{a}' has no counterpart with the same characteristic polynomial"
                    for a in sorted(blocked_by_abelianization)
                ])
            else:
                self.record("attractors", "6", ["no attractor matching is compatible with the boundary data"])

    # basis changes, one cycle of components at a time
    def basis_changes(self, beta: dict[str, str], cmap: dict[str, str], bmap: dict[str, str]
                      ) -> Optional[dict[str, IntMatrix]]:
        comps1, comps2 = self.s1.component_index(), self.s2.component_index()
        curves2, bcurves2 = self.s2.curve_index(), self.s2.boundary_curve_index()
        chosen: dict[str, IntMatrix] = {}
        for cycle in _cycles(self.s1):
            ret1 = ret2 = ((1, 0), (0, 1))
            for cid in cycle:
                ret1 = multiply(comps1[cid].action_matrix, ret1)
                ret2 = multiply(comps2[beta[cid]].action_matrix, ret2)
            candidates = conjugator_candidates(ret1, ret2, self.opts.matrix_bound, self.opts.orientation_preserving)
            if len(candidates) == 0:
                self.record("basis", "1", [f"no conjugator within bound {self.opts.matrix_bound} for the cycle of '{cycle[0]}'"])
                return None
            per_component = {}
            ps = candidates
            for cid in cycle:
                per_component[cid] = ps
                a, a2 = comps1[cid].action_matrix, comps2[beta[cid]].action_matrix
                if self.opts.orientation_preserving and det(a) != det(a2):
                    self.record("basis", "1", [f"orientation cannot be preserved at '{cid}'"])
                    return None
                ps = np.asarray(a2, dtype=np.int64) @ ps @ np.asarray(inverse(a), dtype=np.int64)
            mask = np.ones(len(candidates), dtype=bool)
            for condition, curves, mapping, index in (
                ("2", self.s1.curves(), cmap, curves2),
                ("6", self.s1.boundary_curves(), bmap, bcurves2),
            ):
                for c in curves:
                    if c.component not in per_component:
                        continue
                    v = np.asarray(c.homotopy_class, dtype=np.int64)
                    v2 = np.asarray(index[mapping[c.id]].homotopy_class, dtype=np.int64)
                    image = per_component[c.component] @ v
                    mask &= np.all(image == v2, axis=1) | np.all(image == -v2, axis=1)
                if not mask.any():
                    self.record("basis", condition, [f"no basis change on the cycle of '{cycle[0]}' carries the curve classes"])
                    return None
            first = int(np.argmax(mask))
            for cid in cycle:
                chosen[cid] = as_matrix(per_component[cid][first].tolist())
        return chosen

    # tangency families
    def family_maps(self, cmap: dict[str, str]) -> Iterator[dict[str, str]]:
        curves1, curves2 = self.s1.curve_index(), self.s2.curve_index()
        saddle_image = {(c.kind, c.saddle): curves2[cmap[c.id]].saddle for c in curves1.values()}
        families1 = sorted(self.s1.tangency_families, key=lambda f: f.id)
        families2 = sorted(self.s2.tangency_families, key=lambda f: f.id)
        ratio_blocked: set[str] = set()

        def extend(i: int, used: frozenset, fmap: dict[str, str]):
            if i == len(families1):
                yield dict(fmap)
                return
            family = families1[i]
            for other in families2:
                if other.id in used or len(other.points) != len(family.points):
                    continue
                if saddle_image.get(("stable", family.saddle_s)) != other.saddle_s or \
                        saddle_image.get(("unstable", family.saddle_u)) != other.saddle_u:
                    continue
                if not math.isclose(log_ratio(family.lam, family.mu), log_ratio(other.lam, other.mu), rel_tol=self.opts.rel_tol):
                    ratio_blocked.add(family.id)
                    continue
                yield from extend(i + 1, used | {other.id}, {**fmap, family.id: other.id})

        produced = False
        if len(families1) == len(families2):
            for fmap in extend(0, frozenset(), {}):
                produced = True
                yield fmap
        if not produced:
            reason = (f"log ratios of {sorted(ratio_blocked)} have no counterpart" if ratio_blocked
                      else "no family matching follows the saddle matching")
            self.record("families", "3", [reason])

    # tangency points, pruned by condition 4a as they are placed
    def point_maps(self, beta: dict[str, str], cmap: dict[str, str], fmap: dict[str, str],
                   base: Certificate) -> Iterator[dict[str, str]]:
        fam2 = self.s2.family_index()
        order = [(f, p) for f in sorted(self.s1.tangency_families, key=lambda f: f.id)
                 for p in sorted(f.points, key=lambda p: p.id)]

        def extend(i: int, used: frozenset, pmap: dict[str, str]):
            if i == len(order):
                yield dict(pmap)
                return
            family, point = order[i]
            placed = False
            for other in sorted(fam2[fmap[family.id]].points, key=lambda p: p.id):
                if other.id in used or other.host_curve != cmap[point.host_curve] or other.component != beta[point.component]:
                    continue
                trial = {**pmap, point.id: other.id}
                cert = base.model_copy(update={"point_map": trial})
                pairs = [(q, point) if q.id < point.id else (point, q)
                         for q in family.points if q.id in pmap and q.component == point.component]
                if _condition4a_problems(self.s1, self.s2, cert, family, pairs, self.opts.rel_tol):
                    continue
                placed = True
                yield from extend(i + 1, used | {other.id}, trial)
            if not placed:
                self.record("points", "4a", [f"no image for '{point.id}' keeps the same-component invariants"])

        yield from extend(0, frozenset(), {})

    def run(self) -> tuple[Optional[Certificate], Optional[dict[str, ConditionResult]]]:
        for beta in self.component_maps():
            for cmap in self.curve_maps(beta):
                for bmap, amaps in self.attractor_maps(beta):
                    basis = self.basis_changes(beta, cmap, bmap)
                    if basis is None:
                        continue
                    for fmap in self.family_maps(cmap):
                        base = Certificate(
                            component_map=beta, basis_changes=basis, curve_map=cmap,
                            boundary_curve_map=bmap, tangency_map=fmap, point_map={},
                            attractor_maps=tuple(amaps),
                        )
                        for pmap in self.point_maps(beta, cmap, fmap, base):
                            cert = base.model_copy(update={"point_map": pmap})
                            r4b, found = solve_condition4b(self.s1, self.s2, cert, self.opts.rel_tol, self.opts.m_bound)
                            if not r4b.passed:
                                self.record("m", "4b", r4b.diagnostics)
                                continue
                            r5 = check_condition5(self.s1, self.s2, cert, found)
                            if not r5.passed:
                                self.record("relation", "5", r5.diagnostics)
                                continue
                            witness = cert.model_copy(update={
                                "m_values": tuple(MValue(from_point=a, to_point=b, m=m) for (a, b), m in sorted(found.items())),
                                "attractor_maps": tuple(self._try_identity(am) for am in amaps),
                            })
                            return witness, None
        return None, self.failure_results()

    def _try_identity(self, am: AttractorMap) -> AttractorMap:
        rec, other = self.s1.attractor_index()[am.source], self.s2.attractor_index()[am.target]
        ident = identity_automorphism(rec.rank)
        if rec.rank == other.rank and verify_conjugacy(rec.automorphism, other.automorphism, ident, ident):
            return am.model_copy(update={"psi": ident, "psi_inv": ident})
        return am


def search_certificate(s1: Scheme, s2: Scheme, opts: Optional[CheckOptions] = None
                       ) -> tuple[Optional[Certificate], dict[str, ConditionResult]]:
    """
    Bounded search for a certificate.

    Returns:
        (witness, results): results re-verify the witness when one is found,
        otherwise they describe the deepest failure of the search
    """
    opts = opts or CheckOptions()
    state = _SearchState(s1, s2, opts)
    witness, failure = state.run()
    if witness is None:
        return None, failure
    results, witness = verify_certificate(s1, s2, witness, opts)
    return witness, results


def schemes_equivalent(s1: Scheme, s2: Scheme, cert: Optional[Certificate] = None,
                       opts: Optional[CheckOptions] = None) -> Verdict:
    """
    Decide equivalence of two schemes.

    Args:
        s1: First scheme
        s2: Second scheme
        cert: Optional certificate to verify instead of searching
        opts: Tolerance and search bounds; defaults come from settings

    Returns:
        Verdict with per-condition results and, when found, the witness

    Raises:
        ValidationFailed: either scheme violates its invariants
    """
    opts = opts or CheckOptions()
    for label, s in (("first scheme", s1), ("second scheme", s2)):
        report = validate_scheme(s)
        if not report.ok:
            logger.warning(f"{label} is invalid: {report.messages()}")
            raise ValidationFailed(label, report)

    if cert is not None:
        results, completed = verify_certificate(s1, s2, cert, opts)
        witness = completed if completed is not cert else None
    else:
        witness, results = search_certificate(s1, s2, opts)

    equivalent = all(r.passed for r in results.values())
    verdict = Verdict(equivalent=equivalent, per_condition=results, witness=witness)
    logger.info(f"Equivalence verdict: {verdict.outcome}")
    return verdict
