import random

import pytest

from schemes.models import CONDITION_IDS, AttractorRecord, MValue, PathWinding, identity_certificate
from services.equivalence import (
    CheckOptions,
    abelianization_invariants,
    check_condition1,
    check_condition2_and_6,
    check_condition4a,
    check_condition7,
    compose_certificates,
    invert_certificate,
    schemes_equivalent,
    search_certificate,
    verify_certificate,
)
from services.fixtures import (
    CORPUS_MATRICES,
    DaParams,
    build_da_scheme,
    build_tangency_fixture,
    change_basis,
    conjugated_da_params,
    da_certificate,
    rescale_tau,
)
from services.free_groups import FreeGroupAut, identity_automorphism
from utils.errors import ValidationFailed

CAT_MAP = ((2, 1), (1, 1))
SHEAR = ((1, 1), (0, 1))
SWAP = ((0, 1), (1, 0))


def _failing(results):
    return sorted(c for c, r in results.items() if r.status == "fail")


def _all_pass(results):
    return all(r.passed for r in results.values())


def _random_basis(scheme, rng):
    return {c.id: rng.choice(CORPUS_MATRICES) for c in scheme.components}


def test_reflexive_with_identity_certificate(corpus):
    for scheme in corpus:
        verdict = schemes_equivalent(scheme, scheme, identity_certificate(scheme))
        assert verdict.outcome == "equivalent", verdict.per_condition
        assert list(verdict.per_condition) == list(CONDITION_IDS)


def test_symmetric_under_inverted_certificate(corpus):
    rng = random.Random(1)
    for scheme in corpus:
        image, cert = change_basis(scheme, _random_basis(scheme, rng))
        forward, _ = verify_certificate(scheme, image, cert)
        backward, _ = verify_certificate(image, scheme, invert_certificate(cert))
        assert _all_pass(forward) and _all_pass(backward)


def test_transitive_under_composed_certificates(corpus):
    rng = random.Random(2)
    for scheme in corpus:
        middle, c12 = change_basis(scheme, _random_basis(scheme, rng))
        last, c23 = change_basis(middle, _random_basis(middle, rng))
        results, _ = verify_certificate(scheme, last, compose_certificates(c12, c23))
        assert _all_pass(results), _failing(results)


def test_da_conjugate_matrices_with_certificate():
    params = DaParams(matrix=CAT_MAP)
    s1 = build_da_scheme(params)
    s2 = build_da_scheme(conjugated_da_params(params, SHEAR))
    cert = da_certificate(s1, s2, SHEAR)
    assert schemes_equivalent(s1, s2, cert).outcome == "equivalent"
    assert schemes_equivalent(s2, s1, invert_certificate(cert)).outcome == "equivalent"


def test_da_conjugate_matrices_without_certificate_is_inconclusive():
    params = DaParams(matrix=CAT_MAP)
    s1 = build_da_scheme(params)
    s2 = build_da_scheme(conjugated_da_params(params, SHEAR))
    verdict = schemes_equivalent(s1, s2)
    assert verdict.outcome == "inconclusive"
    assert verdict.per_condition["7"].status == "skipped-needs-certificate"
    assert all(verdict.per_condition[c].passed for c in ("1", "2", "3", "4a", "4b", "5", "6"))


def test_da_different_traces_fail_at_attractors():
    """
    DA schemes give each torus component the identity action, so the trace 3
    and trace 4 pair agrees on condition 1 and is separated by the
    characteristic polynomials of the attractor automorphisms instead.
    """
    s1 = build_da_scheme(DaParams(matrix=CAT_MAP))
    s2 = build_da_scheme(DaParams(matrix=((3, 1), (2, 1))))
    verdict = schemes_equivalent(s1, s2)
    assert verdict.outcome == "not-equivalent"
    assert _failing(verdict.per_condition) == ["7"]
    assert "characteristic polynomial" in verdict.per_condition["7"].diagnostics[0]


def test_abelianization_invariants():
    assert abelianization_invariants(FreeGroupAut.from_literals("x0^2 x1", "x0 x1")) == (1, -3, 1)


def test_condition1_component_action():
    s1 = build_tangency_fixture(1)
    sheared = s1.model_copy(update={"components": (s1.components[0].model_copy(update={"action_matrix": SHEAR}),)})
    result = check_condition1(sheared, s1, identity_certificate(s1))
    assert result.status == "fail"
    assert any("!=" in d for d in result.diagnostics)

    _, results = search_certificate(sheared, s1)
    assert _failing(results) == ["1"]
    assert "no conjugator within bound" in results["1"].diagnostics[0]


def test_condition1_missing_basis_change():
    s = build_tangency_fixture(1)
    cert = identity_certificate(s).model_copy(update={"basis_changes": {}})
    result = check_condition1(s, s, cert)
    assert "missing basis change for component 'T1'" in result.diagnostics


def test_condition1_orientation():
    s = build_tangency_fixture(1)
    image, cert = change_basis(s, {"T1": SWAP})
    assert check_condition1(s, image, cert).passed
    strict = check_condition1(s, image, cert, CheckOptions(orientation_preserving=True))
    assert strict.status == "fail"
    assert any("determinant -1" in d for d in strict.diagnostics)


def test_condition2_curve_classes_follow_basis():
    s = build_tangency_fixture(1)
    image, cert = change_basis(s, {"T1": SWAP})
    r2, _ = check_condition2_and_6(s, image, identity_certificate(s))
    assert r2.status == "fail"
    assert check_condition2_and_6(s, image, cert)[0].passed


def test_condition6_boundary_classes(da_scheme):
    image, cert = change_basis(da_scheme, {"T1": SHEAR})
    _, r6 = check_condition2_and_6(da_scheme, image, identity_certificate(da_scheme))
    assert r6.status == "fail"
    assert check_condition2_and_6(da_scheme, image, cert)[1].passed


def test_condition3_log_ratio():
    s1 = build_tangency_fixture(2, components=2, lam=0.5, mu=2.0)
    s2 = build_tangency_fixture(2, components=2, lam=0.5, mu=4.0)
    verdict = schemes_equivalent(s1, s2, identity_certificate(s1))
    assert _failing(verdict.per_condition) == ["3"]
    assert _failing(search_certificate(s1, s2)[1]) == ["3"]


def test_condition4a_tau_ratio():
    s1 = build_tangency_fixture(2, components=1)
    s2 = rescale_tau(s1, "H1.a1", 3.0)
    result = check_condition4a(s1, s2, identity_certificate(s1), 1e-9)
    assert result.status == "fail"
    assert "invariant" in result.diagnostics[0]


def test_condition4a_winding_compensates_rescaling():
    s1 = build_tangency_fixture(2, components=1, lam=0.5, mu=2.0)
    s2 = rescale_tau(s1, "H1.a1", 4.0).model_copy(update={
        "windings": (PathWinding(from_point="H1.a0", to_point="H1.a1", k=1),),
    })
    assert check_condition4a(s1, s2, identity_certificate(s1), 1e-9).passed
    unwound = s2.model_copy(update={"windings": s1.windings})
    assert check_condition4a(s1, unwound, identity_certificate(s1), 1e-9).status == "fail"


def test_condition4b_no_integer_m():
    s1 = build_tangency_fixture(2, components=2, lam=0.25, mu=4.0)
    s2 = rescale_tau(s1, "H1.a1", 3.0)
    verdict = schemes_equivalent(s1, s2, identity_certificate(s1))
    assert verdict.outcome == "not-equivalent"
    assert verdict.per_condition["4b"].status == "fail"
    assert "no m in bound 64" in verdict.per_condition["4b"].diagnostics[0]
    # the unsolved pair leaves m unfixed for the relation check
    assert verdict.per_condition["5"].diagnostics == ("m(H1.a0, H1.a1) is not fixed",)


def test_condition4b_finds_m():
    s1 = build_tangency_fixture(2, components=2, lam=0.25, mu=4.0)
    s2 = rescale_tau(s1, "H1.a1", 16.0**5)
    opts = CheckOptions(m_bound=10)
    verdict = schemes_equivalent(s1, s2, identity_certificate(s1), opts)
    assert verdict.outcome == "equivalent"
    assert verdict.witness.m_lookup("H1.a0", "H1.a1") == 5
    assert verdict.witness.m_lookup("H1.a1", "H1.a0") == -5

    narrow = schemes_equivalent(s1, s2, identity_certificate(s1), CheckOptions(m_bound=4))
    assert narrow.per_condition["4b"].status == "fail"


def test_condition4b_certificate_m_is_checked():
    s1 = build_tangency_fixture(2, components=2, lam=0.25, mu=4.0)
    s2 = rescale_tau(s1, "H1.a1", 16.0**5)
    right = identity_certificate(s1).model_copy(update={"m_values": (MValue(from_point="H1.a1", to_point="H1.a0", m=-5),)})
    wrong = right.model_copy(update={"m_values": (MValue(from_point="H1.a0", to_point="H1.a1", m=4),)})
    assert verify_certificate(s1, s2, right)[0]["4b"].passed
    results, completed = verify_certificate(s1, s2, wrong)
    assert "certificate m = 4 does not satisfy the relation" in results["4b"].diagnostics[0]
    assert completed is wrong


def test_condition5_relation_across_families():
    s1 = build_tangency_fixture(2, components=2, families=2)
    s2 = s1.model_copy(update={"windings": (
        PathWinding(from_point="H1.a0", to_point="H2.a0", k=1),
        PathWinding(from_point="H1.a1", to_point="H2.a1", k=0),
    )})
    verdict = schemes_equivalent(s1, s2, identity_certificate(s1))
    assert _failing(verdict.per_condition) == ["5"]
    assert any("expected -1" in d for d in verdict.per_condition["5"].diagnostics)
    assert _failing(search_certificate(s1, s2)[1]) == ["5"]


def test_condition7_rank_mismatch(da_scheme):
    record = da_scheme.attractors[0]
    wider = AttractorRecord(
        id=record.id, kind=record.kind, num_periodic_components=1, rank=3,
        automorphism=identity_automorphism(3), boundary_points=record.boundary_points, bunches=record.bunches,
    )
    other = da_scheme.model_copy(update={"attractors": (wider,)})
    result = check_condition7(da_scheme, other, identity_certificate(da_scheme))
    assert result.status == "fail"
    assert any("rank mismatch" in d for d in result.diagnostics)


def test_condition7_without_psi_needs_certificate(da_scheme):
    cert = identity_certificate(da_scheme)
    bare = cert.model_copy(update={"attractor_maps": tuple(
        am.model_copy(update={"psi": None, "psi_inv": None}) for am in cert.attractor_maps
    )})
    assert check_condition7(da_scheme, da_scheme, bare).status == "skipped-needs-certificate"


@pytest.mark.parametrize("build", [
    lambda: build_da_scheme(DaParams(matrix=CAT_MAP)),
    lambda: build_da_scheme(DaParams(matrix=CAT_MAP, lam=0.5, mu=2.0)),
    lambda: build_tangency_fixture(2, components=2),
    lambda: build_tangency_fixture(3, components=1, winding_pattern=(0, 2, -1)),
    lambda: build_tangency_fixture(4, components=2, families=2, winding_pattern=(0, 1, 1, -2)),
])
def test_search_finds_reflexive_witness(build):
    s = build()
    witness, results = search_certificate(s, s)
    assert witness is not None
    assert _all_pass(results)
    again, _ = verify_certificate(s, s, witness)
    assert _all_pass(again)


@pytest.mark.parametrize("basis", [SHEAR, SWAP, ((1, 0), (-1, 1))])
def test_search_recovers_basis_change(basis):
    s = build_tangency_fixture(2, components=2, lam=0.5, mu=2.0, winding_pattern=(0, 1))
    image, _ = change_basis(s, {"T1": basis})
    witness, results = search_certificate(s, image)
    assert _all_pass(results)
    assert _all_pass(verify_certificate(s, image, witness)[0])


def test_invalid_scheme_is_rejected(da_tangency_scheme):
    family = da_tangency_scheme.tangency_families[0].model_copy(update={"lam": 1.5})
    bad = da_tangency_scheme.model_copy(update={"tangency_families": (family,)})
    with pytest.raises(ValidationFailed) as info:
        schemes_equivalent(da_tangency_scheme, bad)
    assert info.value.label == "second scheme"


def test_condition4b_ignores_sign_of_tau():
    s1 = build_tangency_fixture(2, components=2)
    s2 = rescale_tau(s1, "H1.a1", -1.0)
    verdict = schemes_equivalent(s1, s2, identity_certificate(s1))
    assert verdict.per_condition["4b"].status == "pass"
    assert verdict.witness.m_lookup("H1.a0", "H1.a1") == 0
