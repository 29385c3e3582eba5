from __future__ import annotations

import logging

from wulffcap.logging import PACKAGE, CheckContextFilter, check_context, get_logger, set_level


def _record() -> logging.LogRecord:
    return logging.LogRecord("wulffcap.checks", logging.INFO, __file__, 1, "residual %s", (1e-9,), None)


def test_module_loggers_share_the_package_handler():
    log = get_logger("wulffcap.solver")
    assert log.name == "wulffcap.solver"
    assert not log.handlers
    assert logging.getLogger(PACKAGE).handlers
    assert get_logger("elsewhere").name == "wulffcap.elsewhere"


def test_records_carry_the_running_check():
    tagger = CheckContextFilter()
    outside = _record()
    tagger.filter(outside)
    assert outside.check == "-"
    with check_context("hsiung-minkowski", "wulff") as tag:
        inside = _record()
        tagger.filter(inside)
    assert tag == "[hsiung-minkowski wulff]"
    assert inside.check == tag
    after = _record()
    tagger.filter(after)
    assert after.check == "-"


def test_set_level_reaches_children():
    package = logging.getLogger(PACKAGE)
    previous = package.level
    try:
        set_level("DEBUG")
        assert get_logger("wulffcap.norms").isEnabledFor(logging.DEBUG)
    finally:
        package.setLevel(previous)
