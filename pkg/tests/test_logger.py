"""
Tests for logging setup.
"""

import logging
import logging.handlers
import warnings

import pytest

from qmc_dbdp.core.logger import parse_level, setup_logging


@pytest.fixture
def restore_root():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    for handler in root.handlers[:]:
        root.removeHandler(handler)
        handler.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
    logging.captureWarnings(False)


def test_parse_level():
    assert parse_level("debug") == logging.DEBUG
    assert parse_level("WARNING") == logging.WARNING
    assert parse_level(15) == 15
    with pytest.raises(ValueError):
        parse_level("chatty")


def test_console_and_file_handlers(tmp_path, restore_root):
    log_file = tmp_path / "logs" / "run.log"
    root = setup_logging("debug", str(log_file), max_size_mb=1, backup_count=2)
    assert root.level == logging.DEBUG
    assert len(root.handlers) == 2
    rotating = [h for h in root.handlers if isinstance(h, logging.handlers.RotatingFileHandler)]
    assert rotating and rotating[0].backupCount == 2

    logging.getLogger("qmc_dbdp.test").warning("hello %s", "file")
    for handler in root.handlers:
        handler.flush()
    assert "hello file" in log_file.read_text(encoding="utf-8")


def test_setup_replaces_previous_handlers(restore_root):
    setup_logging("info")
    setup_logging("warning")
    assert len(restore_root.handlers) == 1
    assert restore_root.level == logging.WARNING


def test_runtime_warnings_reach_the_log_file(tmp_path, restore_root):
    log_file = tmp_path / "run.log"
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        setup_logging("info", str(log_file))
        warnings.warn("overflow encountered in exp", RuntimeWarning)
    for handler in restore_root.handlers:
        handler.flush()
    text = log_file.read_text(encoding="utf-8")
    assert "py.warnings" in text and "overflow encountered in exp" in text
