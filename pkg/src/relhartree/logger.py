"""
Structured Logging

Every record is one JSON line. Solver progress carries its numbers under
``context``, e.g.

    logger.info("Energy solve converged", extra={"context": {"c": 40.0, "iterations": 812}})

prints

    {"timestamp": "...", "level": "INFO", "logger": "relhartree",
     "message": "Energy solve converged", "context": {"c": 40.0, "iterations": 812}}

INFO and DEBUG lines go to stdout so that they interleave with command
summaries; WARNING and above go to stderr.
"""

import json
import logging
import math
import sys
from collections.abc import Mapping
from datetime import datetime, timezone

UTC = timezone.utc
from typing import Any, TextIO

import numpy as np

PACKAGE_LOGGER = "relhartree"


def _plain(value: Any) -> Any:
    """Turn numpy scalars and arrays, paths and enums into JSON-safe values."""
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        # strict JSON has no inf/nan; c = inf is common
        return repr(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class JSONFormatter(logging.Formatter):
    """Render a record as a single JSON object."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        context = getattr(record, "context", None)
        if context is not None:
            entry["context"] = _plain(context)
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, allow_nan=False)


def _stream_handler(
    stream: TextIO, floor: int, ceiling: int | None = None
) -> logging.StreamHandler:
    handler = logging.StreamHandler(stream)
    handler.setLevel(floor)
    if ceiling is not None:
        handler.addFilter(lambda record: record.levelno < ceiling)
    handler.setFormatter(JSONFormatter())
    return handler


def setup_logger(name: str = PACKAGE_LOGGER, level: str | int = logging.INFO) -> logging.Logger:
    """
    Attach the stdout/stderr JSON handlers to ``name``.

    Loggers that already have handlers are returned untouched, so calling
    this again (tests, re-imports) never duplicates output and never resets
    a level chosen later with set_level.
    """
    configured = logging.getLogger(name)
    if configured.handlers:
        return configured

    configured.setLevel(level)
    configured.propagate = False
    configured.addHandler(_stream_handler(sys.stdout, logging.DEBUG, ceiling=logging.WARNING))
    configured.addHandler(_stream_handler(sys.stderr, logging.WARNING))
    return configured


def set_level(level: str | int) -> None:
    """Change the package log level (e.g. from RELHARTREE_LOG_LEVEL)."""
    logger.setLevel(level.upper() if isinstance(level, str) else level)


logger = setup_logger()
