"""Observability: structured logging and Prometheus metrics."""
from smoothlab.observability.logging import get_logger

__all__ = ["get_logger"]
