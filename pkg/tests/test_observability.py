"""Structured logging and the private Prometheus registry."""
import pytest

from smoothlab.observability import metrics
from smoothlab.observability.logging import _json_processor, get_logger


def test_logger_accepts_key_values():
    """logger.info("event", key=value) is the call style everywhere."""
    log = get_logger("smoothlab.test")
    log.info("probe_event", case_id="MARCHAUD_CLASSIC", sup_ratio=1.5)
    log.debug("quiet_event")


def test_json_processor_adds_level_and_timestamp():
    event = _json_processor(None, "warning", {"event": "x"})
    assert event["level"] == "WARNING"
    assert event["timestamp"] > 0


def test_case_verdicts_are_counted():
    """Verdict counter and duration histogram live in the private registry."""
    pytest.importorskip("prometheus_client")
    metrics.record_case_verdict("TIMAN", "PASS", seconds=0.5)
    metrics.record_case_verdict("TIMAN", "PASS")
    text = metrics.get_metrics_text().decode()
    assert 'smoothlab_case_verdicts_total{case_id="TIMAN",verdict="PASS"}' in text
    assert "smoothlab_case_duration_seconds_bucket" in text


def test_negative_durations_are_ignored():
    pytest.importorskip("prometheus_client")
    metrics.record_modulus_curve(-1.0)
    metrics.record_norm_evaluation("lebesgue", count=0)
    assert b"smoothlab_modulus_curve_seconds" in metrics.get_metrics_text()


def test_write_metrics_file(tmp_path):
    pytest.importorskip("prometheus_client")
    path = tmp_path / "nested" / "lab.prom"
    assert metrics.write_metrics_file(path) is True
    assert "smoothlab_norm_evaluations_total" in path.read_text()
