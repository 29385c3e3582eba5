"""Package logging.

One handler lives on the ``wulffcap`` logger; module loggers are its
children and propagate to it.  Lines emitted while a check runs carry the
check id and case through :func:`check_context`, also inside ``--jobs``
worker threads.
"""
from __future__ import annotations

import logging
import os
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path
from typing import Iterator, Optional

PACKAGE = "wulffcap"
DEFAULT_FORMAT = "%(asctime)s [%(levelname)s] %(name)s %(check)s: %(message)s"
DEFAULT_LEVEL = os.environ.get("WULFFCAP_LOG_LEVEL", "INFO").upper()
DEFAULT_LOG_PATH = Path(
    os.environ.get("WULFFCAP_LOG_FILE", "") or (Path.home() / ".cache" / "wulffcap" / "wulffcap.log")
)

_CHECK: ContextVar[str] = ContextVar("wulffcap_check", default="-")


class CheckContextFilter(logging.Filter):
    """Stamp ``record.check`` with the check currently running in this context."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.check = _CHECK.get()
        return True


@contextmanager
def check_context(check_id: str, case: str) -> Iterator[str]:
    tag = f"[{check_id} {case}]"
    token = _CHECK.set(tag)
    try:
        yield tag
    finally:
        _CHECK.reset(token)


def _build_handler(to_stdout: bool, path: Optional[Path]) -> logging.Handler:
    handler: logging.Handler
    if to_stdout:
        handler = logging.StreamHandler()
    else:
        target = path or DEFAULT_LOG_PATH
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            handler = logging.FileHandler(target, mode="a", encoding="utf-8")
        except OSError:
            handler = logging.StreamHandler()
    handler.addFilter(CheckContextFilter())
    handler.setFormatter(logging.Formatter(DEFAULT_FORMAT))
    return handler


def configure_logger(
    *,
    level: str | int | None = None,
    to_stdout: bool | None = None,
    path: Optional[Path] = None,
) -> logging.Logger:
    """Create or reuse the package logger; the first call fixes its sink."""
    logger = logging.getLogger(PACKAGE)
    if logger.handlers:
        return logger
    resolved_stdout = to_stdout if to_stdout is not None else _env_bool("WULFFCAP_LOG_TO_STDOUT", False)
    logger.setLevel(level or DEFAULT_LEVEL)
    logger.addHandler(_build_handler(resolved_stdout, path))
    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    configure_logger()
    if name != PACKAGE and not name.startswith(PACKAGE + "."):
        name = f"{PACKAGE}.{name}"
    return logging.getLogger(name)


def set_level(level: str | int) -> None:
    """``--log-level``: children inherit from the package logger."""
    configure_logger().setLevel(level)


def _env_bool(key: str, default: bool) -> bool:
    value = os.environ.get(key)
    if value is None:
        return default
    return value.strip().lower() not in {"", "0", "false", "no", "off"}
