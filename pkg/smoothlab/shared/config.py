"""
Run-configuration loading. Fails fast on bad config.
Structured files may be YAML or JSON; the schema lives in smoothlab.harness.schemas.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

try:
    import yaml
    HAS_YAML = True
except ImportError:
    HAS_YAML = False


class ConfigError(Exception):
    """Raised when a configuration value or file is invalid."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)


def load_structured_file(path: str | Path) -> dict[str, Any]:
    """
    Read a YAML or JSON mapping from disk.
    Suffix .json is parsed as JSON, everything else as YAML (JSON is valid YAML anyway).
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}", key="path")
    text = p.read_text(encoding="utf-8")
    try:
        if p.suffix.lower() == ".json" or not HAS_YAML:
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, ValueError) as e:
        raise ConfigError(f"cannot parse {p.name}: {e}", key="path") from e
    except Exception as e:  # yaml.YAMLError
        raise ConfigError(f"cannot parse {p.name}: {e}", key="path") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{p.name} must contain a mapping at top level", key="path")
    return data
