"""
Structured logging: JSON when LOG_JSON=1, human-readable otherwise.
Always written to stderr; stdout is reserved for command results.
"""
import logging
import os
import sys
import threading
import time
from typing import Any

LOG_JSON = os.environ.get("LOG_JSON", "").lower() in ("1", "true", "yes")
LOG_LEVEL = os.environ.get("LOG_LEVEL", "WARNING").upper()

_config_lock = threading.Lock()
_configured = False


def _json_processor(logger: Any, method_name: str, event_dict: dict) -> dict:
    event_dict["timestamp"] = time.time()
    event_dict["level"] = method_name.upper()
    return event_dict


class _FallbackLogger:
    """Fallback when structlog is not installed: info(msg, **kw) -> log.info(msg)."""

    def __init__(self, log: logging.Logger):
        self._log = log

    def _emit(self, level: int, msg: str, kw: dict) -> None:
        extra = f" {kw}" if kw else ""
        self._log.log(level, "%s%s", msg, extra)

    def debug(self, msg: str, **kw: Any) -> None:
        self._emit(logging.DEBUG, msg, kw)

    def info(self, msg: str, **kw: Any) -> None:
        self._emit(logging.INFO, msg, kw)

    def warning(self, msg: str, **kw: Any) -> None:
        self._emit(logging.WARNING, msg, kw)

    def error(self, msg: str, **kw: Any) -> None:
        self._emit(logging.ERROR, msg, kw)


def configure_logging(json_output: bool | None = None, level: str | None = None) -> None:
    """(Re)configure structlog. The CLI calls this for --log-json / --verbose."""
    global _configured
    try:
        import structlog
    except ImportError:
        return
    use_json = LOG_JSON if json_output is None else json_output
    lvl = getattr(logging, (level or LOG_LEVEL).upper(), logging.WARNING)
    shared_processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.StackInfoRenderer(),
    ]
    if use_json:
        tail = [_json_processor, structlog.processors.JSONRenderer()]
    else:
        tail = [structlog.dev.ConsoleRenderer(colors=False)]
    with _config_lock:
        structlog.configure(
            processors=shared_processors + tail,
            wrapper_class=structlog.make_filtering_bound_logger(lvl),
            context_class=dict,
            logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
            cache_logger_on_first_use=False,
        )
        _configured = True


def get_logger(name: str) -> Any:
    """
    Return a structured logger. Use: logger.info("event", key=val, ...)
    Falls back to standard logging when structlog is not installed.
    """
    try:
        import structlog
    except ImportError:
        log = logging.getLogger(name)
        log.setLevel(getattr(logging, LOG_LEVEL, logging.WARNING))
        return _FallbackLogger(log)
    if not _configured:
        configure_logging()
    return structlog.get_logger(name)
