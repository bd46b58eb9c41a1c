"""Env parsing: empty -> default, invalid -> handled, valid -> parsed; LabSettings layering."""
import logging

import pytest
from pydantic import ValidationError

from smoothlab.harness.runner import options_from_config
from smoothlab.harness.schemas import parse_run_config
from smoothlab.shared.env_helpers import get_float_env, get_int_env
from smoothlab.shared.settings import LabSettings, get_lab_settings, reset_lab_settings


@pytest.fixture
def fresh_settings():
    reset_lab_settings()
    yield
    reset_lab_settings()


class TestGetIntEnv:
    """get_int_env never raises."""

    def test_missing_var_returns_default(self, monkeypatch):
        monkeypatch.delenv("SMOOTHLAB_TEST_INT", raising=False)
        assert get_int_env("SMOOTHLAB_TEST_INT", default=60) == 60

    def test_empty_string_logs_warning_returns_default(self, monkeypatch, caplog):
        """Empty or blank -> warning naming the variable, default returned"""
        monkeypatch.setenv("SMOOTHLAB_TEST_INT", "   ")
        with caplog.at_level(logging.WARNING):
            assert get_int_env("SMOOTHLAB_TEST_INT", default=8) == 8
        assert "SMOOTHLAB_TEST_INT" in caplog.text
        assert "using default: 8" in caplog.text

    def test_invalid_logs_warning_returns_default(self, monkeypatch, caplog):
        monkeypatch.setenv("SMOOTHLAB_TEST_INT", "12.3")
        with caplog.at_level(logging.WARNING):
            assert get_int_env("SMOOTHLAB_TEST_INT", default=8) == 8
        assert "invalid integer value" in caplog.text

    def test_valid_int_with_whitespace_parsed(self, monkeypatch):
        monkeypatch.setenv("SMOOTHLAB_TEST_INT", " 256 ")
        assert get_int_env("SMOOTHLAB_TEST_INT", default=8) == 256


class TestGetFloatEnv:
    """get_float_env rejects garbage and non-finite values."""

    @pytest.mark.parametrize("raw", ["", "abc", "inf", "nan"])
    def test_bad_values_return_default(self, monkeypatch, raw):
        monkeypatch.setenv("SMOOTHLAB_TEST_FLOAT", raw)
        assert get_float_env("SMOOTHLAB_TEST_FLOAT", default=16.0) == 16.0

    def test_valid_float_parsed(self, monkeypatch):
        monkeypatch.setenv("SMOOTHLAB_TEST_FLOAT", "0.25")
        assert get_float_env("SMOOTHLAB_TEST_FLOAT", default=16.0) == 0.25


class TestLabSettings:
    """SMOOTHLAB_* defaults: empty -> default, ints clamped, bad values raise."""

    def test_defaults(self, monkeypatch):
        for name in ("CEILING", "JOBS", "DIR_SAMPLES", "SEED", "OUT_DIR"):
            monkeypatch.delenv(f"SMOOTHLAB_{name}", raising=False)
        s = LabSettings()
        assert (s.CEILING, s.JOBS, s.DIR_SAMPLES, s.SEED, s.OUT_DIR) == (100.0, 1, 16, 0, "out")

    def test_empty_strings_become_defaults(self, monkeypatch):
        monkeypatch.setenv("SMOOTHLAB_JOBS", "")
        monkeypatch.setenv("SMOOTHLAB_CEILING", "")
        s = LabSettings()
        assert s.JOBS == 1
        assert s.CEILING == 100.0

    def test_ints_are_clamped(self, monkeypatch):
        monkeypatch.setenv("SMOOTHLAB_JOBS", "500")
        monkeypatch.setenv("SMOOTHLAB_DIR_SAMPLES", "1")
        s = LabSettings()
        assert s.JOBS == 64
        assert s.DIR_SAMPLES == 4

    def test_invalid_values_raise(self, monkeypatch):
        monkeypatch.setenv("SMOOTHLAB_JOBS", "many")
        with pytest.raises(ValidationError):
            LabSettings()
        monkeypatch.setenv("SMOOTHLAB_JOBS", "2")
        monkeypatch.setenv("SMOOTHLAB_CEILING", "-1")
        with pytest.raises(ValidationError):
            LabSettings()

    def test_cached_until_reset(self, monkeypatch, fresh_settings):
        monkeypatch.setenv("SMOOTHLAB_JOBS", "3")
        first = get_lab_settings()
        monkeypatch.setenv("SMOOTHLAB_JOBS", "5")
        assert get_lab_settings() is first
        reset_lab_settings()
        assert get_lab_settings().JOBS == 5


def test_run_config_overrides_env(monkeypatch, fresh_settings):
    """Env supplies seed and ceiling only where the run config is silent."""
    monkeypatch.setenv("SMOOTHLAB_SEED", "11")
    monkeypatch.setenv("SMOOTHLAB_CEILING", "5")
    base = {
        "version": "1",
        "families": {"g": {"kind": "gaussians"}},
        "cases": [{"id": "TRIVIAL_BOUND", "family": "g", "params": {"k": 1, "m": 1, "p": 2}}],
    }
    options = options_from_config(parse_run_config(base))
    assert (options.seed, options.ceiling) == (11, 5.0)
    options = options_from_config(parse_run_config({**base, "seed": 0, "ceiling": 2}))
    assert (options.seed, options.ceiling) == (0, 2.0)
