"""
Separability of one-dimensional basic sets and the finite-moduli criteria,
checked over declared intersection facts.

Missing data never passes silently: a check that cannot be decided from the
declared facts reports "undetermined".
"""
from typing import Iterable, Optional, Sequence

from schemes.facts import (
    BasicSet,
    CheckResult,
    CriteriaReport,
    Facts,
    IntersectionEntry,
    IntersectionTable,
    SaddleClassification,
    SeparabilityReport,
    SeparatrixEnd,
)
from schemes.models import AttractorRecord, Bunch, BunchMember
from utils.errors import NonPartitioningPairing
from utils.logging import get_logger

logger = get_logger(__name__)


def _result(failures: Sequence[str], decided: bool, undecided_reason: str) -> CheckResult:
    if failures:
        return CheckResult(status="fail", diagnostics=tuple(failures))
    if not decided:
        return CheckResult(status="undetermined", diagnostics=(undecided_reason,))
    return CheckResult(status="pass")


def enumerate_bunches(rec: AttractorRecord, pairing: Sequence[Sequence[str]]) -> list[Bunch]:
    """
    One bunch per group of boundary points whose free separatrices share a
    complement component; groups are listed in their cyclic order.

    Raises:
        NonPartitioningPairing: groups miss, repeat or invent boundary points
    """
    points = list(rec.boundary_points)
    seen: list[str] = [p for group in pairing for p in group]
    unknown = sorted(set(seen) - set(points))
    repeated = sorted({p for p in seen if seen.count(p) > 1})
    missing = sorted(set(points) - set(seen))
    if unknown or repeated or missing or any(not group for group in pairing):
        raise NonPartitioningPairing(
            f"pairing of {rec.id} does not partition its boundary points "
            f"(unknown={unknown}, repeated={repeated}, missing={missing})"
        )
    bunches = []
    for i, group in enumerate(pairing):
        members = tuple(
            BunchMember(boundary_point=p, side=side)
            for p in group
            for side in ("-", "+")
        )
        bunches.append(Bunch(id=f"{rec.id}.b{i}", members=members, degree=len(group)))
    return bunches


def _heteroclinic_on(saddle: str, manifold: str, table: IntersectionTable, roster: dict[str, BasicSet]) -> list[IntersectionEntry]:
    """Entries putting heteroclinic points on W^manifold(saddle)."""
    hits = []
    for entry in table.entries:
        if manifold == "s":
            mine, other = entry.target, entry.source
            partner_kinds = {"saddle", "repeller"}
        else:
            mine, other = entry.source, entry.target
            partner_kinds = {"saddle", "attractor"}
        if mine.basic_set != saddle or mine.manifold != manifold or other.basic_set == saddle:
            continue
        partner = roster.get(other.basic_set)
        if partner is not None and partner.kind in partner_kinds:
            hits.append(entry)
    return hits


def check_separable(
    rec: AttractorRecord,
    ends: Sequence[SeparatrixEnd],
    table: IntersectionTable,
    roster: Iterable[BasicSet],
    closure: Optional[Sequence[str]] = None,
) -> SeparabilityReport:
    """
    Check the three separability conditions for an attractor, or their
    duals under f^-1 for a repeller.

    Args:
        rec: Attractor or repeller record with its boundary points
        ends: Declared landing of the free separatrix of each boundary point
        table: Intersection table, flagged complete or not
        roster: Declared basic sets
        closure: Labels of the basic sets making up cl(W^s) minus W^s
            (cl(W^u) minus W^u for a repeller); None if not declared

    Returns:
        SeparabilityReport; separable is None while any condition is undetermined
    """
    roster_index = {b.id: b for b in roster}
    repeller = rec.kind == "repeller"
    end_kind = "sink" if repeller else "source"
    y_kinds = {"saddle", end_kind}
    warnings = []

    # 1: closure difference carried by trivial saddles and sources (sinks)
    y_set: Optional[set[str]] = None
    if closure is None:
        cond1 = CheckResult(status="undetermined", diagnostics=("closure difference not declared",))
    else:
        failures = []
        for label in sorted(set(closure)):
            member = roster_index.get(label)
            if member is None:
                failures.append(f"closure member '{label}' is not in the roster")
            elif member.kind not in y_kinds:
                failures.append(f"closure member '{label}' is a {member.kind}, not a trivial {' or '.join(sorted(y_kinds))}")
        cond1 = _result(failures, True, "")
        if not failures:
            y_set = set(closure)

    # 2: every free separatrix of a boundary point lands on a source (sink)
    if not rec.boundary_points:
        warnings.append(f"{rec.id} declares no boundary points; condition 2 holds vacuously")
    by_point = {e.boundary_point: e for e in ends}
    failures, undecided = [], []
    for point in rec.boundary_points:
        end = by_point.get(point)
        if end is None or end.landing == "unknown":
            undecided.append(point)
            continue
        if end.landing != end_kind:
            failures.append(f"separatrix of {point} lands on a {end.landing}, not a {end_kind}")
        elif end.target is not None and end.target not in roster_index:
            failures.append(f"separatrix of {point} lands on unknown basic set '{end.target}'")
        elif y_set is not None and end.target is not None and end.target not in y_set:
            failures.append(f"separatrix of {point} lands on {end.target}, outside the closure set")
    cond2 = _result(failures, not undecided, f"no landing declared for {', '.join(undecided)}")

    # 3: saddles of the closure set carry no heteroclinic points
    manifold = "u" if repeller else "s"
    if y_set is None:
        cond3 = CheckResult(status="undetermined", diagnostics=("closure set unknown",))
    else:
        failures = []
        for label in sorted(y_set):
            if _kind(roster_index, label) != "saddle":
                continue
            for entry in _heteroclinic_on(label, manifold, table, roster_index):
                other = entry.source if manifold == "s" else entry.target
                failures.append(f"W^{manifold}({label}) meets W^{other.manifold}({other.basic_set})")
        cond3 = _result(failures, table.complete, "intersection table is incomplete")

    conditions = {"1": cond1, "2": cond2, "3": cond3}
    statuses = {c.status for c in conditions.values()}
    separable = False if "fail" in statuses else (True if statuses == {"pass"} else None)
    logger.info(f"Separability of {rec.id}: {separable}")
    return SeparabilityReport(
        attractor=rec.id,
        separable=separable,
        conditions=conditions,
        y_set=tuple(sorted(y_set or ())),
        warnings=tuple(warnings),
    )


def _kind(roster: dict[str, BasicSet], label: str) -> Optional[str]:
    member = roster.get(label)
    return member.kind if member else None


def check_finite_moduli_criteria(table: IntersectionTable, roster: Iterable[BasicSet]) -> CriteriaReport:
    """Evaluate the five finite-moduli criteria over the declared table."""
    index = {b.id: b for b in roster}
    tangencies = [e for e in table.entries if e.tangent]
    fails: dict[str, list[str]] = {c: [] for c in ("1", "2", "3", "4", "5")}
    undecided: dict[str, list[str]] = {c: [] for c in ("1", "2", "3", "4", "5")}

    def describe(e: IntersectionEntry) -> str:
        return f"W^{e.source.manifold}({e.source.basic_set}) / W^{e.target.manifold}({e.target.basic_set})"

    for e in tangencies:
        # 1: non-transverse intersections only between trivial basic sets
        for label in (e.source.basic_set, e.target.basic_set):
            member = index.get(label)
            if member is None:
                undecided["1"].append(f"{describe(e)}: {label} is not in the roster")
            elif not member.trivial:
                fails["1"].append(f"{describe(e)}: {label} is a non-trivial {member.kind}")
        # 2: finitely many orbits, finite contact order
        if not e.finite:
            fails["2"].append(f"{describe(e)}: infinitely many tangency orbits")
        if e.order is None:
            undecided["2"].append(f"{describe(e)}: contact order not declared")
        # 4: the transverse arc separates stable and unstable manifolds
        if e.side_separated is False:
            fails["4"].append(f"{describe(e)}: stable and unstable manifolds accumulate on one side")
        elif e.side_separated is None:
            undecided["4"].append(f"{describe(e)}: side separation not declared")

    # 3: finitely many saddle-manifold orbits through tangency endpoints
    for e in tangencies:
        p, q = e.source.basic_set, e.target.basic_set
        if p not in index or q not in index or not (index[p].trivial and index[q].trivial):
            continue
        for other in table.entries:
            on_p = other.source.basic_set == p and other.source.manifold == "u"
            on_q = other.target.basic_set == q and other.target.manifold == "s"
            partner = other.target.basic_set if on_p else other.source.basic_set
            if (on_p or on_q) and _kind(index, partner) == "saddle" and not other.finite:
                fails["3"].append(f"{describe(other)}: infinitely many orbits next to the tangency {describe(e)}")

    # 5: no saddle manifolds entering a chain of two tangencies
    for first in tangencies:
        for second in tangencies:
            if first.target.basic_set != second.source.basic_set:
                continue
            p, r = first.source.basic_set, second.target.basic_set
            for other in table.entries:
                into_p = (other.target.basic_set == p and other.target.manifold == "s"
                          and _kind(index, other.source.basic_set) == "saddle" and other.source.basic_set != p)
                from_r = (other.source.basic_set == r and other.source.manifold == "u"
                          and _kind(index, other.target.basic_set) == "saddle" and other.target.basic_set != r)
                if into_p:
                    fails["5"].append(f"chain {p}->{first.target.basic_set}->{r}: W^u({other.source.basic_set}) meets W^s({p})")
                if from_r:
                    fails["5"].append(f"chain {p}->{first.target.basic_set}->{r}: W^s({other.target.basic_set}) meets W^u({r})")

    criteria = {}
    for c in fails:
        failures = sorted(set(fails[c]))
        reasons = sorted(set(undecided[c]))
        if not table.complete:
            reasons.append("intersection table is incomplete")
        criteria[c] = _result(failures, not reasons, "; ".join(reasons))
    return CriteriaReport(criteria=criteria)


def classify_saddles(table: IntersectionTable, roster: Iterable[BasicSet]) -> SaddleClassification:
    """
    Split saddles into those whose unstable manifold meets the stable manifold
    of another saddle or of an attractor, and the rest.
    """
    index = {b.id: b for b in roster}
    saddles = sorted(b.id for b in index.values() if b.kind == "saddle")
    omega_u = set()
    for e in table.entries:
        if (e.source.manifold == "u" and e.source.basic_set in saddles
                and e.target.basic_set != e.source.basic_set
                and _kind(index, e.target.basic_set) in ("saddle", "attractor")):
            omega_u.add(e.source.basic_set)
    violations = []
    for p in sorted(omega_u):
        for e in table.entries:
            if (e.target.basic_set == p and e.target.manifold == "s"
                    and e.source.basic_set != p
                    and _kind(index, e.source.basic_set) in ("saddle", "repeller")):
                violations.append(f"W^u({e.source.basic_set}) meets W^s({p}) although {p} is in the unstable class")
    return SaddleClassification(
        omega_s=tuple(s for s in saddles if s not in omega_u),
        omega_u=tuple(sorted(omega_u)),
        violations=tuple(violations),
    )


def check_facts(facts: Facts) -> list[SeparabilityReport]:
    """Separability report for every attractor and repeller in a facts file."""
    reports = []
    for rec in facts.attractors:
        if rec.id in facts.pairings:
            bunches = enumerate_bunches(rec, facts.pairings[rec.id])
            logger.debug(f"{rec.id}: {len(bunches)} bunch(es) of degrees {[b.degree for b in bunches]}")
        reports.append(check_separable(
            rec,
            facts.ends.get(rec.id, ()),
            facts.table,
            facts.roster,
            facts.closure.get(rec.id),
        ))
    return reports
