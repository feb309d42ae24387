"""
Invariant checks for parsed or generated schemes.

Violations are collected, never raised. Paths address fields by label
(``s_curves.c1.homotopy_class``) rather than by list position, so the report
does not depend on the order of entries in the file.
"""
from collections import Counter, defaultdict
from math import gcd

from pydantic import BaseModel, ConfigDict

from schemes.models import BoundaryCurve, Scheme, SeparatrixCurve
from services.gl2z import det
from utils.logging import get_logger

logger = get_logger(__name__)

EIGENVALUE_RULE = "0<|λ|<1<|μ|"


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [str(v) for v in self.violations]


class _Collector:
    def __init__(self):
        self.found: list[Violation] = []

    def add(self, path: str, message: str) -> None:
        self.found.append(Violation(path=path, message=message))

    def report(self) -> ValidationReport:
        ordered = sorted(set(self.found), key=lambda v: (v.path, v.message))
        return ValidationReport(violations=tuple(ordered))


def _check_homotopy_class(out: _Collector, path: str, pq: tuple[int, int]) -> None:
    p, q = pq
    if p == 0 and q == 0:
        out.add(path, "homotopy class (0, 0) is contractible; curves must be non-contractible")
    elif gcd(abs(p), abs(q)) != 1:
        out.add(path, f"homotopy class ({p}, {q}) is not primitive; a simple closed curve needs gcd 1")


def _check_components(s: Scheme, out: _Collector) -> None:
    ids = {c.id for c in s.components}
    images = Counter()
    for c in s.components:
        path = f"components.{c.id}"
        if det(c.action_matrix) not in (1, -1):
            out.add(f"{path}.action_matrix", f"determinant {det(c.action_matrix)} is not +1 or -1")
        if c.image_component not in ids:
            out.add(f"{path}.image_component", f"unknown component '{c.image_component}'")
        else:
            images[c.image_component] += 1
    for target, count in images.items():
        if count > 1:
            out.add(f"components.{target}", f"image of {count} components; the image assignment is not a permutation")


def _check_curves(s: Scheme, out: _Collector) -> None:
    components = {c.id for c in s.components}
    families = (("s_curves", s.s_curves, "stable"), ("u_curves", s.u_curves, "unstable"))
    for section, curves, kind in families:
        index = {c.id: c for c in curves}
        per_saddle = Counter(c.saddle for c in curves)
        for c in curves:
            path = f"{section}.{c.id}"
            if c.kind != kind:
                out.add(f"{path}.kind", f"{c.kind} curve listed among {kind} curves")
            if c.component not in components:
                out.add(f"{path}.component", f"unknown component '{c.component}'")
            _check_homotopy_class(out, f"{path}.homotopy_class", c.homotopy_class)
            partner = index.get(c.partner)
            if c.partner == c.id:
                out.add(f"{path}.partner", "a curve cannot be its own partner")
            elif partner is None:
                out.add(f"{path}.partner", f"unknown partner '{c.partner}'")
            else:
                if partner.partner != c.id:
                    out.add(f"{path}.partner", f"partner '{c.partner}' does not point back")
                if partner.saddle != c.saddle:
                    out.add(f"{path}.partner", f"partner '{c.partner}' belongs to saddle '{partner.saddle}'")
        for saddle, count in per_saddle.items():
            if count != 2:
                out.add(f"{section}.saddle:{saddle}", f"saddle has {count} circles, expected a pair")

    both = set(s.saddles("stable")) & set(s.saddles("unstable"))
    for saddle in sorted(both):
        out.add(f"saddles.{saddle}", "saddle appears among both stable and unstable curve saddles")


def _check_boundary_curves(s: Scheme, out: _Collector) -> None:
    components = {c.id for c in s.components}
    attractors = s.attractor_index()
    sections: tuple[tuple[str, tuple[BoundaryCurve, ...], str], ...] = (
        ("s_boundary", s.s_boundary_curves, "attractor"),
        ("u_boundary", s.u_boundary_curves, "repeller"),
    )
    for section, curves, host_kind in sections:
        seen = Counter()
        for c in curves:
            path = f"{section}.{c.id}"
            _check_homotopy_class(out, f"{path}.homotopy_class", c.homotopy_class)
            if c.component not in components:
                out.add(f"{path}.component", f"unknown component '{c.component}'")
            record = attractors.get(c.attractor)
            if record is None:
                out.add(f"{path}.attractor", f"unknown attractor '{c.attractor}'")
                continue
            if record.kind != host_kind:
                out.add(f"{path}.attractor", f"{section} curves must belong to a {host_kind}, '{record.id}' is a {record.kind}")
            if c.boundary_point not in record.boundary_points:
                out.add(f"{path}.boundary_point", f"'{c.boundary_point}' is not a boundary point of '{record.id}'")
            seen[(record.id, c.boundary_point)] += 1
        for record in s.attractors:
            if record.kind != host_kind:
                continue
            for point in record.boundary_points:
                count = seen[(record.id, point)]
                if count != 1:
                    out.add(f"attractors.{record.id}.boundary_points.{point}",
                            f"{count} {section} curves, expected exactly one")


def _check_tangencies(s: Scheme, out: _Collector) -> None:
    components = {c.id for c in s.components}
    s_curves: dict[str, SeparatrixCurve] = {c.id: c for c in s.s_curves}
    s_saddles = set(s.saddles("stable"))
    u_saddles = set(s.saddles("unstable"))
    for family in s.tangency_families:
        path = f"tangencies.{family.id}"
        if not (0 < abs(family.lam) < 1 < abs(family.mu)):
            out.add(path, f"{EIGENVALUE_RULE} violated by lambda={family.lam!r}, mu={family.mu!r}")
        if family.saddle_s not in s_saddles:
            out.add(f"{path}.saddle_s", f"'{family.saddle_s}' has no stable curves")
        if family.saddle_u not in u_saddles:
            out.add(f"{path}.saddle_u", f"'{family.saddle_u}' has no unstable curves")
        for point in family.points:
            ppath = f"{path}.points.{point.id}"
            if point.tau == 0:
                out.add(f"{ppath}.tau", "tau must be nonzero")
            if point.order < 2:
                out.add(f"{ppath}.order", "order 1 marks a transverse intersection, not a tangency")
            if point.component not in components:
                out.add(f"{ppath}.component", f"unknown component '{point.component}'")
            host = s_curves.get(point.host_curve)
            if host is None:
                out.add(f"{ppath}.host_curve", f"'{point.host_curve}' is not a stable curve")
                continue
            if host.saddle != family.saddle_s:
                out.add(f"{ppath}.host_curve", f"host curve belongs to saddle '{host.saddle}', not '{family.saddle_s}'")
            if host.component != point.component:
                out.add(f"{ppath}.component", f"point lies in '{point.component}' but its host curve lies in '{host.component}'")


def _check_windings(s: Scheme, out: _Collector) -> None:
    points = {pid: p for pid, (_, p) in s.point_index().items()}
    stored: dict[tuple[str, str], list[int]] = defaultdict(list)
    for w in s.windings:
        path = f"windings.{w.from_point}->{w.to_point}"
        stored[(w.from_point, w.to_point)].append(w.k)
        missing = [label for label in (w.from_point, w.to_point) if label not in points]
        for label in missing:
            out.add(path, f"unknown tangency point '{label}'")
        if missing:
            continue
        if points[w.from_point].component != points[w.to_point].component:
            out.add(path, "winding between points of different components")
        if w.from_point == w.to_point and w.k != 0:
            out.add(path, f"winding of a point to itself must be 0, got {w.k}")
    for (a, b), ks in stored.items():
        path = f"windings.{a}->{b}"
        if len(ks) > 1:
            out.add(path, "winding stored more than once")
        reverse = stored.get((b, a))
        if a < b and reverse and min(reverse) != -min(ks):
            out.add(path, f"reverse winding {min(reverse)} is not the negative of {min(ks)}")


def _check_attractors(s: Scheme, out: _Collector) -> None:
    for record in s.attractors:
        path = f"attractors.{record.id}"
        if record.automorphism.rank != record.rank:
            out.add(f"{path}.automorphism", f"automorphism has rank {record.automorphism.rank}, record declares {record.rank}")
        duplicates = [p for p, n in Counter(record.boundary_points).items() if n > 1]
        for point in duplicates:
            out.add(f"{path}.boundary_points", f"boundary point '{point}' listed twice")

        bunch_count = Counter()
        for bunch in record.bunches:
            bpath = f"{path}.bunches.{bunch.id}"
            members = bunch.members
            if len(members) != 2 * bunch.degree:
                out.add(bpath, f"{len(members)} members for degree {bunch.degree}, expected {2 * bunch.degree}")
            for j in range(0, len(members) - 1, 2):
                first, second = members[j], members[j + 1]
                if first.boundary_point != second.boundary_point or first.side == second.side:
                    out.add(bpath, f"members {j} and {j + 1} are not the two sides of one boundary point")
            distinct = {m.boundary_point for m in members}
            if len(distinct) != bunch.degree:
                out.add(bpath, f"degree {bunch.degree} but {len(distinct)} distinct boundary points")
            for point in sorted(distinct):
                if point not in record.boundary_points:
                    out.add(bpath, f"unknown boundary point '{point}'")
                bunch_count[point] += 1
        for point in record.boundary_points:
            if bunch_count[point] != 1:
                out.add(f"{path}.boundary_points.{point}", f"appears in {bunch_count[point]} bunches, expected exactly one")


def validate_scheme(s: Scheme) -> ValidationReport:
    """
    Check every structural invariant of a scheme.

    Args:
        s: Scheme parsed from a file or built in memory

    Returns:
        Report with one entry per violated invariant, sorted by path
    """
    out = _Collector()
    _check_components(s, out)
    _check_curves(s, out)
    _check_boundary_curves(s, out)
    _check_tangencies(s, out)
    _check_windings(s, out)
    _check_attractors(s, out)
    report = out.report()
    if report.violations:
        logger.debug(f"Scheme has {len(report.violations)} violation(s)")
    return report
