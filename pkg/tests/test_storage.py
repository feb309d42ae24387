import pytest

from schemes.models import identity_certificate
from schemes.storage import (
    load_scheme,
    parse_certificate,
    parse_facts,
    parse_mapspec,
    parse_scheme,
    save_scheme,
    serialize_certificate,
    serialize_facts,
    serialize_mapspec,
    serialize_scheme,
)
from services.fixtures import build_da_facts, build_tangency_mapspec
from utils.errors import ParseError


def test_corpus_round_trips(corpus):
    for scheme in corpus:
        text = serialize_scheme(scheme)
        parsed = parse_scheme(text)
        assert parsed == scheme
        assert serialize_scheme(parsed) == text


def test_serialization_is_byte_stable(da_tangency_scheme):
    assert serialize_scheme(da_tangency_scheme) == serialize_scheme(da_tangency_scheme.model_copy())
    text = serialize_scheme(da_tangency_scheme)
    assert text.endswith("}\n")
    assert '"lambda": "0.5"' in text
    assert '"s_boundary"' in text and '"tangencies"' in text


def test_certificate_round_trip(da_scheme):
    cert = identity_certificate(da_scheme)
    text = serialize_certificate(cert)
    assert parse_certificate(text) == cert
    assert '"x0"' in text


def test_mapspec_round_trip():
    ms = build_tangency_mapspec()
    text = serialize_mapspec(ms)
    assert parse_mapspec(text) == ms
    assert '"1/2"' in text or '"-1/2"' in text


def test_facts_round_trip(da_params):
    facts = build_da_facts(da_params)
    assert parse_facts(serialize_facts(facts)) == facts


def test_truncated_file_names_missing_section(da_scheme):
    text = serialize_scheme(da_scheme)
    cut = text[: text.index('"windings"')]
    with pytest.raises(ParseError) as info:
        parse_scheme(cut)
    assert "windings" in str(info.value)
    assert info.value.line is not None


def test_missing_section(da_scheme):
    text = serialize_scheme(da_scheme).replace('"k_f"', '"k_g"')
    with pytest.raises(ParseError, match="missing section 'k_f'"):
        parse_scheme(text)


def test_duplicate_keys_rejected():
    with pytest.raises(ParseError, match="duplicate key 'k_f'"):
        parse_scheme('{"k_f": 1, "k_f": 2}')


def test_duplicate_ids_rejected(da_scheme):
    doubled = da_scheme.model_copy(update={"components": da_scheme.components * 2})
    with pytest.raises(ParseError, match="duplicate id 'T1' among components"):
        parse_scheme(serialize_scheme(doubled))


def test_bad_field_reports_path(da_scheme):
    text = serialize_scheme(da_scheme).replace('"k_f": 1', '"k_f": "one"')
    with pytest.raises(ParseError) as info:
        parse_scheme(text)
    assert info.value.field == "k_f"


def test_bad_word_literal_is_parse_error(da_scheme):
    text = serialize_scheme(da_scheme).replace('"x0^2 x1"', '"x0^^2"')
    with pytest.raises(ParseError):
        parse_scheme(text)


def test_save_and_load(tmp_path, da_scheme):
    path = tmp_path / "nested" / "da.json"
    save_scheme(da_scheme, path)
    assert load_scheme(path) == da_scheme


def test_unreadable_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_scheme(tmp_path / "absent.json")
