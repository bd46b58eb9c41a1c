"""
Process-level defaults via Pydantic Settings (SMOOTHLAB_* env vars).
Empty string is treated as missing -> default; out-of-range ints are clamped.
"""
from __future__ import annotations

from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

CEILING_DEFAULT = 100.0
DIR_SAMPLES_DEFAULT = 16


def _int_or_default(v: object, default: int, lo: int, hi: int) -> int:
    if v is None:
        return default
    if isinstance(v, int):
        return max(lo, min(v, hi))
    s = str(v).strip()
    if not s:
        return default
    try:
        n = int(s)
    except ValueError:
        raise ValueError(f"expected an integer in [{lo}, {hi}], got {s!r}")
    return max(lo, min(n, hi))


class LabSettings(BaseSettings):
    """Lab defaults from env. Run configs override these per run."""

    model_config = SettingsConfigDict(env_prefix="SMOOTHLAB_", extra="ignore")

    CEILING: float = CEILING_DEFAULT
    JOBS: int = 1
    DIR_SAMPLES: int = DIR_SAMPLES_DEFAULT
    SEED: int = 0
    OUT_DIR: str = "out"
    SUITE_PATH: str = "data/default_suite.yaml"

    @field_validator("JOBS", mode="before")
    @classmethod
    def _coerce_jobs(cls, v: object) -> int:
        return _int_or_default(v, 1, 1, 64)

    @field_validator("DIR_SAMPLES", mode="before")
    @classmethod
    def _coerce_dirs(cls, v: object) -> int:
        return _int_or_default(v, DIR_SAMPLES_DEFAULT, 4, 256)

    @field_validator("SEED", mode="before")
    @classmethod
    def _coerce_seed(cls, v: object) -> int:
        return _int_or_default(v, 0, 0, 2 ** 63 - 1)

    @field_validator("CEILING", mode="before")
    @classmethod
    def _coerce_ceiling(cls, v: object) -> float:
        if v is None or (isinstance(v, str) and not v.strip()):
            return CEILING_DEFAULT
        x = float(v)
        if not x > 0:
            raise ValueError("CEILING must be positive")
        return x


_settings: Optional[LabSettings] = None


def get_lab_settings() -> LabSettings:
    """Return cached settings."""
    global _settings
    if _settings is None:
        _settings = LabSettings()
    return _settings


def reset_lab_settings() -> None:
    """Drop the cache (tests change env between calls)."""
    global _settings
    _settings = None
