import pytest
from pydantic import ValidationError

from schemes.facts import BasicSet, Facts, IntersectionEntry, IntersectionTable, ManifoldRef, SeparatrixEnd
from services.fixtures import build_da_facts, build_nonseparable_facts
from services.separability import (
    check_facts,
    check_finite_moduli_criteria,
    check_separable,
    classify_saddles,
    enumerate_bunches,
)
from utils.errors import NonPartitioningPairing

ROSTER = (
    BasicSet(id="p", kind="saddle"),
    BasicSet(id="q", kind="saddle"),
    BasicSet(id="r", kind="saddle"),
    BasicSet(id="s", kind="saddle"),
    BasicSet(id="L1", kind="attractor"),
    BasicSet(id="alpha", kind="source"),
)


def ref(basic_set, manifold):
    return ManifoldRef(basic_set=basic_set, manifold=manifold)


def crossing(p, q, **kwargs):
    return IntersectionEntry(source=ref(p, "u"), target=ref(q, "s"), **kwargs)


def tangency(p, q, **kwargs):
    options = {"transversality": "tangent", "order": 2, "side_separated": True, **kwargs}
    return IntersectionEntry(source=ref(p, "u"), target=ref(q, "s"), **options)


def criteria(*entries, complete=True):
    return check_finite_moduli_criteria(IntersectionTable(entries=entries, complete=complete), ROSTER)


def test_da_facts_are_separable(da_params):
    report, = check_facts(build_da_facts(da_params))
    assert report.separable is True
    assert report.y_set == ("alpha1", "alpha2")
    assert all(c.status == "pass" for c in report.conditions.values())


def test_separatrix_landing_on_saddle():
    report, = check_facts(build_nonseparable_facts())
    assert report.separable is False
    assert report.conditions["2"].status == "fail"
    assert "lands on a saddle" in report.conditions["2"].diagnostics[0]
    assert report.conditions["1"].status == "pass"


def test_heteroclinic_point_on_closure_saddle():
    facts = build_nonseparable_facts()
    ends = (
        SeparatrixEnd(boundary_point="p1", landing="source", target="alpha"),
        SeparatrixEnd(boundary_point="p2", landing="source", target="alpha"),
    )
    roster = facts.roster + (BasicSet(id="tau", kind="saddle"),)
    table = IntersectionTable(entries=(crossing("tau", "sigma"),), complete=True)
    report = check_separable(facts.attractors[0], ends, table, roster, closure=("alpha", "sigma"))
    assert report.separable is False
    assert report.conditions["3"].diagnostics == ("W^s(sigma) meets W^u(tau)",)


def test_non_trivial_closure_member(da_params):
    facts = build_da_facts(da_params)
    report = check_separable(facts.attractors[0], facts.ends["L1"], facts.table, facts.roster,
                             closure=("alpha1", "L1"))
    assert report.conditions["1"].status == "fail"
    assert report.separable is False


def test_missing_data_is_undetermined(da_params):
    facts = build_da_facts(da_params)
    report = check_separable(facts.attractors[0], facts.ends["L1"][:1], IntersectionTable(), facts.roster, closure=None)
    assert report.separable is None
    assert report.conditions["1"].status == "undetermined"
    assert report.conditions["2"].diagnostics == ("no landing declared for p2",)
    assert report.conditions["3"].status == "undetermined"


def test_repeller_uses_dual_conditions(da_params):
    facts = build_da_facts(da_params)
    repeller = facts.attractors[0].model_copy(update={"kind": "repeller"})
    roster = (BasicSet(id="L1", kind="repeller"), BasicSet(id="omega1", kind="sink"), BasicSet(id="omega2", kind="sink"))
    ends = (
        SeparatrixEnd(boundary_point="p1", landing="sink", target="omega1"),
        SeparatrixEnd(boundary_point="p2", landing="sink", target="omega2"),
    )
    report = check_separable(repeller, ends, IntersectionTable(complete=True), roster, closure=("omega1", "omega2"))
    assert report.separable is True
    wrong = check_separable(repeller, facts.ends["L1"], IntersectionTable(complete=True), facts.roster,
                            closure=("alpha1", "alpha2"))
    assert wrong.conditions["1"].status == "fail"
    assert wrong.conditions["2"].status == "fail"


def test_no_boundary_points_warns(da_params):
    record = build_da_facts(da_params).attractors[0].model_copy(update={"boundary_points": (), "bunches": ()})
    report = check_separable(record, (), IntersectionTable(complete=True), ROSTER, closure=("alpha",))
    assert report.separable is True
    assert "vacuously" in report.warnings[0]


def test_clean_table_has_finite_moduli():
    report = criteria(tangency("p", "q"))
    assert report.finite_moduli is True


def test_incomplete_table_is_undetermined():
    report = criteria(tangency("p", "q"), complete=False)
    assert report.finite_moduli is None
    assert report.criteria["1"].diagnostics == ("intersection table is incomplete",)


@pytest.mark.parametrize("criterion,entries", [
    ("1", (tangency("L1", "q"),)),
    ("2", (tangency("p", "q", orbit_count="infinite"),)),
    ("3", (tangency("p", "q"), crossing("p", "r", orbit_count="infinite"))),
    ("4", (tangency("p", "q", side_separated=False),)),
    ("5", (tangency("p", "q"), tangency("q", "r"), crossing("s", "p"))),
])
def test_each_criterion_can_fail(criterion, entries):
    report = criteria(*entries)
    assert report.criteria[criterion].status == "fail"
    assert report.finite_moduli is False


def test_undeclared_side_separation():
    report = criteria(tangency("p", "q", side_separated=None))
    assert report.criteria["4"].status == "undetermined"
    assert report.finite_moduli is None


def test_classify_saddles():
    table = IntersectionTable(entries=(crossing("p", "q"), crossing("s", "p")), complete=True)
    result = classify_saddles(table, ROSTER)
    assert result.omega_u == ("p", "s")
    assert result.omega_s == ("q", "r")
    assert result.violations == ("W^u(s) meets W^s(p) although p is in the unstable class",)


def test_enumerate_bunches(da_params):
    record = build_da_facts(da_params).attractors[0]
    single, = enumerate_bunches(record, [["p1", "p2"]])
    assert single.degree == 2 and len(single.members) == 4
    split = enumerate_bunches(record, [["p1"], ["p2"]])
    assert [b.id for b in split] == ["L1.b0", "L1.b1"]


@pytest.mark.parametrize("pairing", [[["p1"]], [["p1", "p1", "p2"]], [["p1", "x"], ["p2"]], [["p1", "p2"], []]])
def test_enumerate_bunches_rejects_non_partitions(da_params, pairing):
    record = build_da_facts(da_params).attractors[0]
    with pytest.raises(NonPartitioningPairing):
        enumerate_bunches(record, pairing)


def test_check_facts_validates_pairings(da_params):
    facts = build_da_facts(da_params).model_copy(update={"pairings": {"L1": (("p1",),)}})
    with pytest.raises(NonPartitioningPairing):
        check_facts(facts)


def test_facts_reject_unknown_basic_sets():
    with pytest.raises(ValidationError):
        Facts(roster=ROSTER, intersections=(crossing("p", "nowhere"),))


def test_unlisted_basic_set_is_undetermined():
    report = criteria(tangency("p", "ghost"))
    assert report.criteria["1"].status == "undetermined"
    assert "ghost is not in the roster" in report.criteria["1"].diagnostics[0]
    assert report.finite_moduli is None
