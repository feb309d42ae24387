import pytest

from config import settings
from services.fixtures import DaParams, build_da_scheme, build_tangency_fixture, fixture_corpus

DEFAULT_CORPUS_SEED = 20240601
CORPUS_SEED = DEFAULT_CORPUS_SEED if settings.SEED is None else settings.SEED

CAT_MAP = ((2, 1), (1, 1))


@pytest.fixture
def da_params():
    return DaParams(matrix=CAT_MAP)


@pytest.fixture
def da_scheme(da_params):
    return build_da_scheme(da_params)


@pytest.fixture
def da_tangency_scheme():
    return build_da_scheme(DaParams(matrix=CAT_MAP, lam=0.5, mu=2.0))


@pytest.fixture
def cross_fixture():
    """One family, one point on each of two tori: a single cross-component pair."""
    return build_tangency_fixture(2, components=2, lam=0.5, mu=2.0)


@pytest.fixture(scope="session")
def corpus():
    return fixture_corpus(CORPUS_SEED)
