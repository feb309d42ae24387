"""
Logging for scheme-kit.

stdout is reserved for JSON results, so every handler writes to stderr or
to the rotating log file.
"""
import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

from config import settings

NOISY_LOGGERS = ('hypothesis', 'sympy', 'numpy')


def setup_logging(level: Optional[str] = None):
    """
    Configure the root logger from settings.

    Args:
        level: Overrides SCHEME_KIT_LOG_LEVEL when given
    """
    formatter = logging.Formatter(settings.LOG_FORMAT)

    root = logging.getLogger()
    root.setLevel(level or settings.LOG_LEVEL)
    for handler in root.handlers[:]:
        root.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root.addHandler(console_handler)

    if settings.LOG_FILE:
        log_path = Path(settings.LOG_FILE)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_path,
            maxBytes=settings.LOG_MAX_SIZE,
            backupCount=settings.LOG_BACKUP_COUNT,
            encoding='utf-8'
        )
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


def set_verbose(verbose: bool) -> None:
    """Switch the root logger to DEBUG for one invocation."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
