"""
Run-configuration schema. Unknown keys are rejected; `version` must match SCHEMA_VERSION.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from smoothlab import SCHEMA_VERSION
from smoothlab.harness.cases import CaseId, CaseParams
from smoothlab.harness.families import FamilySpec
from smoothlab.shared.config import ConfigError, load_structured_file


class GridConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cells: int = Field(4096, ge=8, description="cells per axis")
    half_width: float = Field(1.0, gt=0, description="box is [-L, L]^n")


class TGridConfig(BaseModel):
    """t_j = 2^{j / per_octave} between lo and hi (both included when on the ladder)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: float = Field(2.0 ** -8, gt=0)
    hi: float = Field(2.0 ** -2, gt=0)
    per_octave: int = Field(1, ge=1, le=16)

    @model_validator(mode="after")
    def _order(self) -> "TGridConfig":
        if not self.hi >= self.lo:
            raise ValueError("t-grid needs hi >= lo")
        return self

    def points(self) -> np.ndarray:
        j0 = math.ceil(math.log2(self.lo) * self.per_octave - 1e-9)
        j1 = math.floor(math.log2(self.hi) * self.per_octave + 1e-9)
        return 2.0 ** (np.arange(j0, j1 + 1) / self.per_octave)


class CaseConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: CaseId
    family: str
    label: Optional[str] = None
    params: CaseParams = Field(default_factory=CaseParams)
    mode: Literal["axis", "full"] = "axis"
    ceiling: Optional[float] = Field(None, gt=0)
    probe: bool = False
    extended: Optional[bool] = None
    refine: bool = False
    box_probe: bool = False
    tgrid: Optional[TGridConfig] = None

    @property
    def name(self) -> str:
        return self.label or self.id.value


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    version: str
    seed: Optional[int] = Field(None, ge=0, description="default: SMOOTHLAB_SEED")
    out: Optional[str] = None
    jobs: Optional[int] = Field(None, ge=1, le=64)
    ceiling: Optional[float] = Field(None, gt=0, description="default: SMOOTHLAB_CEILING")
    dir_samples: Optional[int] = Field(None, ge=4, le=256)
    grid: GridConfig = Field(default_factory=GridConfig)
    tgrid: TGridConfig = Field(default_factory=TGridConfig)
    families: dict[str, FamilySpec]
    cases: list[CaseConfig] = Field(..., min_length=1)

    @field_validator("version", mode="before")
    @classmethod
    def _version(cls, v: Any) -> Any:
        v = str(v)
        if v != SCHEMA_VERSION:
            raise ValueError(f"config version {v!r} does not match schema version {SCHEMA_VERSION!r}")
        return v

    @model_validator(mode="after")
    def _references(self) -> "RunConfig":
        names = set()
        for case in self.cases:
            if case.family not in self.families:
                raise ValueError(f"case {case.name} uses unknown family {case.family!r}")
            if case.name in names:
                raise ValueError(f"duplicate case label {case.name!r}")
            names.add(case.name)
        return self


def _first_error(e: ValidationError) -> tuple[str, str]:
    err = e.errors()[0]
    loc = ".".join(str(x) for x in err.get("loc", ()))
    return f"{loc}: {err.get('msg', 'invalid')}" if loc else err.get("msg", "invalid"), loc


def parse_run_config(data: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        msg, loc = _first_error(e)
        raise ConfigError(f"invalid run config: {msg}", key=loc or None) from e


def load_run_config(path: str | Path) -> RunConfig:
    return parse_run_config(load_structured_file(path))


def run_config_schema() -> str:
    """JSON schema of RunConfig (pretty-printed)."""
    return json.dumps(RunConfig.model_json_schema(), indent=2, sort_keys=True)
