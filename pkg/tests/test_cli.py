import json

import pytest
from typer.testing import CliRunner

from main import app
from schemes.mapspec import TangencyClaim
from schemes.storage import load_certificate, load_scheme, save_facts, save_mapspec, save_scheme
from services.fixtures import build_da_facts, build_nonseparable_facts, build_tangency_mapspec


@pytest.fixture
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:  # click >= 8.2 always captures stderr separately
        return CliRunner()


def invoke(runner, *args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture
def da_files(runner, tmp_path):
    """DA schemes for A and P A P^-1 plus the certificate between them."""
    a, b, cert = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "cert.json"
    assert invoke(runner, "fixture", "da", "--matrix", "2,1,1,1", "-o", a).exit_code == 0
    result = invoke(runner, "fixture", "da", "--matrix", "2,1,1,1", "--conjugate-by", "1,1,0,1",
                    "--certificate-out", cert, "-o", b)
    assert result.exit_code == 0, result.stderr
    return a, b, cert


def test_fixture_prints_scheme_without_output(runner):
    result = invoke(runner, "fixture", "da", "--matrix", "2,1,1,1", "--lambda", "0.5", "--mu", "2")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["tangencies"][0]["lambda"] == "0.5"
    assert "s_boundary" in data


@pytest.mark.parametrize("args", [
    ("--matrix", "1,1,0,1"),
    ("--matrix", "0,1,1,0"),
    ("--matrix", "2,1,1"),
    ("--matrix", "2,1,1,1", "--lambda", "0.5"),
    ("--matrix", "2,1,1,1", "--certificate-out", "cert.json"),
])
def test_fixture_da_invalid_input(runner, args):
    result = invoke(runner, "fixture", "da", *args)
    assert result.exit_code == 3
    assert "Error:" in result.stderr
    assert result.stdout == ""


def test_validate_exit_codes(runner, tmp_path, da_files):
    a, _, _ = da_files
    ok = invoke(runner, "scheme", "validate", a)
    assert ok.exit_code == 0
    assert json.loads(ok.stdout) == {"violations": []}

    scheme = load_scheme(a)
    curve = scheme.s_boundary_curves[0].model_copy(update={"homotopy_class": (0, 0)})
    bad = tmp_path / "bad.json"
    save_scheme(scheme.model_copy(update={"s_boundary_curves": (curve,) + scheme.s_boundary_curves[1:]}), bad)
    failed = invoke(runner, "scheme", "validate", bad)
    assert failed.exit_code == 1
    assert json.loads(failed.stdout)["violations"][0]["path"] == "s_boundary.l_p1.homotopy_class"


def test_validate_malformed_file(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{"components": [', encoding="utf-8")
    result = invoke(runner, "scheme", "validate", broken)
    assert result.exit_code == 3
    assert "Error:" in result.stderr


def test_compare_with_certificate(runner, da_files, tmp_path):
    a, b, cert = da_files
    result = invoke(runner, "scheme", "compare", a, b, "--certificate", cert)
    assert result.exit_code == 0, result.stdout
    data = json.loads(result.stdout)
    assert data["outcome"] == "equivalent"
    assert set(data["per_condition"]) == {"1", "2", "3", "4a", "4b", "5", "6", "7"}


def test_compare_search_is_inconclusive(runner, da_files, tmp_path):
    a, b, _ = da_files
    witness = tmp_path / "witness.json"
    result = invoke(runner, "scheme", "compare", a, b, "--witness-out", witness)
    assert result.exit_code == 2
    assert json.loads(result.stdout)["per_condition"]["7"]["status"] == "skipped-needs-certificate"
    assert load_certificate(witness).component_map == {"T1": "T1"}


def test_compare_not_equivalent(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    invoke(runner, "fixture", "da", "--matrix", "2,1,1,1", "-o", a)
    invoke(runner, "fixture", "da", "--matrix", "3,1,2,1", "-o", b)
    result = invoke(runner, "scheme", "compare", a, b)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["outcome"] == "not-equivalent"


def test_compare_tangency_fixtures_with_options(runner, tmp_path):
    a = tmp_path / "a.json"
    invoke(runner, "fixture", "tangency", "--points", "2", "--components", "2", "--windings", "0,3", "-o", a)
    result = invoke(runner, "scheme", "compare", a, a, "--m-bound", "2", "--matrix-bound", "2",
                    "--tol", "1e-6", "--orientation-preserving")
    assert result.exit_code == 0
    witness = json.loads(result.stdout)["witness"]
    assert witness["m_values"] == [{"from_point": "H1.a0", "to_point": "H1.a1", "m": 0}]


def test_compare_invalid_scheme(runner, da_files, tmp_path):
    a, _, _ = da_files
    scheme = load_scheme(a)
    bad = tmp_path / "bad.json"
    save_scheme(scheme.model_copy(update={"attractors": (scheme.attractors[0].model_copy(update={"rank": 3}),)}), bad)
    result = invoke(runner, "scheme", "compare", a, bad)
    assert result.exit_code == 3
    assert "second scheme" in result.stderr


def test_moduli_compute(runner, tmp_path):
    path = tmp_path / "ms.json"
    assert invoke(runner, "fixture", "mapspec", "--tau", "3/2", "-o", path).exit_code == 0
    result = invoke(runner, "moduli", "compute", path)
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["k_f"] == 1
    report, = data["tangencies"]
    assert report["tau"] == "1.5"
    assert report["classification"] == "one-sided"


def test_moduli_compute_flags_wrong_claim(runner, tmp_path):
    ms = build_tangency_mapspec(order=3)
    claim = TangencyClaim(transition="g", one_sided=True)
    path = tmp_path / "ms.json"
    save_mapspec(ms.model_copy(update={"tangency_points": (claim,)}), path)
    result = invoke(runner, "moduli", "compute", path)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["tangencies"][0]["claim_agrees"] is False


def test_moduli_iterate(runner):
    result = invoke(runner, "moduli", "iterate", "--tau", "1", "--lambda", "0.5", "--mu", "2", "--k", "3")
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"tau": "1.0", "k": 3, "tau_k": "0.015625"}

    bad = invoke(runner, "moduli", "iterate", "--tau", "1", "--lambda", "2", "--mu", "3", "--k", "1")
    assert bad.exit_code == 3


def test_separability_commands(runner, tmp_path, da_params):
    good, bad = tmp_path / "good.json", tmp_path / "bad.json"
    save_facts(build_da_facts(da_params), good)
    save_facts(build_nonseparable_facts(), bad)

    separable = invoke(runner, "separability", "check", good)
    assert separable.exit_code == 0
    assert json.loads(separable.stdout)[0]["separable"] is True
    assert invoke(runner, "separability", "check", bad).exit_code == 1

    criteria = invoke(runner, "criteria", "check", good)
    assert criteria.exit_code == 0
    assert json.loads(criteria.stdout)["finite_moduli"] is True


def test_plot_separatrix(runner, tmp_path):
    ms, csv_path = tmp_path / "ms.json", tmp_path / "curve.csv"
    invoke(runner, "fixture", "mapspec", "-o", ms)
    result = invoke(runner, "plot", "separatrix", ms, "--saddle", "s", "--kind", "unstable",
                    "--samples", "3", "-o", csv_path)
    assert result.exit_code == 0
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,y" and len(lines) == 4

    missing = invoke(runner, "plot", "separatrix", ms, "--saddle", "nowhere", "-o", csv_path)
    assert missing.exit_code == 3
