"""Scenario assembly, closed-loop stepping and metrics."""
