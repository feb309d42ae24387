import logging

import pytest
from pydantic import ValidationError

from config import Settings
from utils.logging import set_verbose, setup_logging


def test_defaults():
    s = Settings(_env_file=None)
    assert s.REL_TOL == 1e-9
    assert s.MATRIX_BOUND == 10
    assert s.M_BOUND == 64
    assert s.ORIENTATION_PRESERVING is False
    assert s.FD_STEP is None


def test_environment_override(monkeypatch):
    monkeypatch.setenv("SCHEME_KIT_M_BOUND", "8")
    monkeypatch.setenv("SCHEME_KIT_LOG_LEVEL", " debug ")
    monkeypatch.setenv("SCHEME_KIT_SEED", "7")
    s = Settings(_env_file=None)
    assert s.M_BOUND == 8
    assert s.LOG_LEVEL == "DEBUG"
    assert s.SEED == 7


@pytest.mark.parametrize("fields", [
    {"LOG_LEVEL": "chatty"},
    {"REL_TOL": 0.0},
    {"FD_STEP": -1e-4},
    {"MATRIX_BOUND": 0},
])
def test_rejected_settings(fields):
    with pytest.raises(ValidationError):
        Settings(_env_file=None, **fields)


def test_verbose_switches_root_level():
    setup_logging("WARNING")
    assert logging.getLogger().level == logging.WARNING
    set_verbose(False)
    assert logging.getLogger().level == logging.WARNING
    set_verbose(True)
    assert logging.getLogger().level == logging.DEBUG
    setup_logging()
