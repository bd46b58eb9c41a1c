"""Tests for run-configuration validation and the bundled suite."""
import json
from pathlib import Path

import pytest

from smoothlab.harness.cases import CaseId, parameter_validate
from smoothlab.harness.schemas import TGridConfig, load_run_config, parse_run_config, run_config_schema
from smoothlab.shared.config import ConfigError

DEFAULT_SUITE = Path(__file__).resolve().parents[1] / "data" / "default_suite.yaml"


def _config(**overrides):
    data = {
        "version": "1",
        "families": {"g": {"kind": "gaussians"}},
        "cases": [{"id": "MARCHAUD_CLASSIC", "family": "g", "params": {"k": 1, "m": 1, "p": 2}}],
    }
    data.update(overrides)
    return data


def test_defaults():
    """Grid, t-grid and ceiling defaults."""
    config = parse_run_config(_config())
    assert config.grid.cells == 4096
    assert config.ceiling is None and config.seed is None
    assert config.cases[0].name == "MARCHAUD_CLASSIC"
    assert config.cases[0].mode == "axis"


def test_version_must_match():
    """Configs from another schema version are refused."""
    with pytest.raises(ConfigError) as exc:
        parse_run_config(_config(version="2"))
    assert exc.value.key == "version"


def test_unknown_keys_are_rejected():
    """extra='forbid' everywhere."""
    with pytest.raises(ConfigError):
        parse_run_config(_config(colour="blue"))
    bad_case = [{"id": "MARCHAUD_CLASSIC", "family": "g", "params": {"k": 1, "zeta": 2}}]
    with pytest.raises(ConfigError):
        parse_run_config(_config(cases=bad_case))


def test_case_references():
    """Unknown families, unknown ids and duplicate labels fail validation."""
    with pytest.raises(ConfigError):
        parse_run_config(_config(cases=[{"id": "MARCHAUD_CLASSIC", "family": "nope"}]))
    with pytest.raises(ConfigError):
        parse_run_config(_config(cases=[{"id": "NOT_A_CASE", "family": "g"}]))
    twice = [{"id": "TIMAN", "family": "g"}, {"id": "TIMAN", "family": "g"}]
    with pytest.raises(ConfigError):
        parse_run_config(_config(cases=twice))
    labelled = [{"id": "TIMAN", "family": "g"}, {"id": "TIMAN", "family": "g", "label": "TIMAN-p3"}]
    assert len(parse_run_config(_config(cases=labelled)).cases) == 2


def test_empty_case_list():
    """At least one case."""
    with pytest.raises(ConfigError):
        parse_run_config(_config(cases=[]))


def test_tgrid_points():
    """Dyadic ladder between lo and hi."""
    assert TGridConfig().points().tolist() == [2.0 ** j for j in range(-8, -1)]
    assert TGridConfig(lo=0.25, hi=1.0, per_octave=2).points().size == 5
    assert TGridConfig(lo=0.3, hi=0.35).points().size == 0
    with pytest.raises(ValueError):
        TGridConfig(lo=1.0, hi=0.5)


def test_load_json_config(tmp_path):
    """JSON files load through the same schema."""
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(_config(seed=3)))
    assert load_run_config(path).seed == 3
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.yaml")


def test_bundled_suite_is_consistent():
    """The default suite validates and only its probe falls outside the case hypotheses."""
    config = load_run_config(DEFAULT_SUITE)
    assert config.grid.cells == 8192
    assert {c.id for c in config.cases} == set(CaseId)
    for case in config.cases:
        violations = parameter_validate(case.id, case.params)
        assert bool(violations) == case.probe, (case.name, violations)


def test_schema_is_json():
    """The exported schema names the top-level keys."""
    schema = json.loads(run_config_schema())
    assert {"version", "families", "cases"} <= set(schema["properties"])
