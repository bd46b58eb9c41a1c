"""Shared helpers for env parsing: treat empty as missing, safe numeric parsing."""
import logging
import os

logger = logging.getLogger(__name__)


def get_int_env(name: str, default: int) -> int:
    """
    Integer from an environment variable. Never raises.

    Missing -> default silently; empty or invalid -> warning and default.
    """
    raw = os.environ.get(name)
    if raw is None:
        return default
    s = raw.strip()
    if not s:
        logger.warning("Environment variable %s is empty (value: %r), using default: %d", name, raw, default)
        return default
    try:
        return int(s)
    except ValueError:
        logger.warning("Environment variable %s has invalid integer value %r, using default: %d", name, s, default)
        return default


def get_float_env(name: str, default: float) -> float:
    """Float counterpart of get_int_env. Non-finite values are rejected."""
    raw = os.environ.get(name)
    if raw is None:
        return default
    s = raw.strip()
    if not s:
        logger.warning("Environment variable %s is empty (value: %r), using default: %g", name, raw, default)
        return default
    try:
        v = float(s)
    except ValueError:
        logger.warning("Environment variable %s has invalid float value %r, using default: %g", name, s, default)
        return default
    if v != v or v in (float("inf"), float("-inf")):
        logger.warning("Environment variable %s is not finite (%r), using default: %g", name, s, default)
        return default
    return v
