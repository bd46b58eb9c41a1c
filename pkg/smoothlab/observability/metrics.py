"""
Prometheus metrics: case verdicts, norm evaluations, modulus-curve cost.
Lightweight: prometheus_client in a private registry; lazy init; no-ops when not installed.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

try:
    from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest, write_to_textfile
    HAS_PROMETHEUS = True
except ImportError:
    HAS_PROMETHEUS = False

METRICS_REGISTRY: Optional["CollectorRegistry"] = None

case_verdicts_total: Optional["Counter"] = None
norm_evaluations_total: Optional["Counter"] = None
modulus_curve_seconds: Optional["Histogram"] = None
case_duration_seconds: Optional["Histogram"] = None


def _ensure_metrics() -> None:
    global METRICS_REGISTRY, case_verdicts_total, norm_evaluations_total  # noqa: PLW0603
    global modulus_curve_seconds, case_duration_seconds
    if not HAS_PROMETHEUS or case_verdicts_total is not None:
        return
    METRICS_REGISTRY = CollectorRegistry()
    case_verdicts_total = Counter(
        "smoothlab_case_verdicts_total",
        "Verification runs by case and verdict",
        ["case_id", "verdict"],
        registry=METRICS_REGISTRY,
    )
    norm_evaluations_total = Counter(
        "smoothlab_norm_evaluations_total",
        "Space norm evaluations by space family",
        ["family"],
        registry=METRICS_REGISTRY,
    )
    modulus_curve_seconds = Histogram(
        "smoothlab_modulus_curve_seconds",
        "Wall time of one measured modulus curve",
        buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 20.0, 60.0),
        registry=METRICS_REGISTRY,
    )
    case_duration_seconds = Histogram(
        "smoothlab_case_duration_seconds",
        "Wall time of one case over a family",
        ["case_id"],
        buckets=(0.1, 1.0, 5.0, 15.0, 60.0, 300.0, 1200.0),
        registry=METRICS_REGISTRY,
    )


def record_case_verdict(case_id: str, verdict: str, seconds: float | None = None) -> None:
    if not HAS_PROMETHEUS:
        return
    _ensure_metrics()
    case_verdicts_total.labels(case_id=case_id, verdict=verdict).inc()
    if seconds is not None and seconds >= 0:
        case_duration_seconds.labels(case_id=case_id).observe(seconds)


def record_norm_evaluation(family: str, count: int = 1) -> None:
    if not HAS_PROMETHEUS or count <= 0:
        return
    _ensure_metrics()
    norm_evaluations_total.labels(family=family).inc(count)


def record_modulus_curve(seconds: float) -> None:
    if not HAS_PROMETHEUS or seconds < 0:
        return
    _ensure_metrics()
    modulus_curve_seconds.observe(seconds)


def get_metrics_text() -> bytes:
    """Prometheus exposition format. Empty when prometheus_client is missing."""
    if not HAS_PROMETHEUS:
        return b""
    _ensure_metrics()
    return generate_latest(METRICS_REGISTRY) if METRICS_REGISTRY else b""


def write_metrics_file(path: str | Path) -> bool:
    """Dump the registry for a textfile collector. Returns False when metrics are unavailable."""
    if not HAS_PROMETHEUS:
        return False
    _ensure_metrics()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), METRICS_REGISTRY)
    return True
