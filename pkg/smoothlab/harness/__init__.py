"""Verification harness: families, cases, runner, reports."""
