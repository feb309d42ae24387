import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from services.gl2z import (
    IDENTITY,
    candidate_box,
    conjugate,
    det,
    inverse,
    is_unimodular,
    iter_conjugators,
    multiply,
    same_up_to_sign,
    search_gl2z_conjugator,
)

CAT = ((2, 1), (1, 1))
CAT_CONJUGATE = ((3, -1), (1, 0))


def test_conjugate_by_shear():
    assert conjugate(((1, 1), (0, 1)), CAT) == CAT_CONJUGATE


def test_identity_first_in_box():
    box = candidate_box(3)
    assert tuple(map(tuple, box[0].tolist())) == IDENTITY
    assert all(abs(det(m.tolist())) == 1 for m in box)
    with pytest.raises(ValueError):
        box[0, 0, 0] = 5


def test_orientation_preserving_box():
    assert all(det(m.tolist()) == 1 for m in candidate_box(2, orientation_preserving=True))


def test_search_identity_for_equal_matrices():
    assert search_gl2z_conjugator(CAT, CAT, 1) == IDENTITY


def test_search_finds_valid_conjugator():
    p = search_gl2z_conjugator(CAT, CAT_CONJUGATE, 2)
    assert p is not None
    assert multiply(p, CAT) == multiply(CAT_CONJUGATE, p)


def test_all_candidates_reverify():
    for p in iter_conjugators(CAT, CAT_CONJUGATE, 3):
        assert multiply(p, CAT) == multiply(CAT_CONJUGATE, p)
        assert is_unimodular(p)


def test_trace_mismatch_gives_none():
    assert search_gl2z_conjugator(CAT, ((3, 1), (2, 1)), 10) is None


def test_bound_must_be_positive():
    with pytest.raises(ValueError):
        search_gl2z_conjugator(CAT, CAT, 0)


def test_inverse_requires_unimodular():
    with pytest.raises(ValueError):
        inverse(((2, 0), (0, 1)))


def test_same_up_to_sign():
    assert same_up_to_sign((1, -2), (-1, 2))
    assert not same_up_to_sign((1, 2), (2, 1))


entries = st.integers(min_value=-4, max_value=4)


@settings(max_examples=200, derandomize=True)
@given(entries, entries, entries, entries)
def test_inverse_roundtrip(a, b, c, d):
    m = ((a, b), (c, d))
    if abs(a * d - b * c) != 1:
        return
    assert multiply(m, inverse(m)) == IDENTITY
    assert np.array_equal(np.asarray(inverse(m)) @ np.asarray(m), np.eye(2, dtype=int))
