"""Motivation metrics scoring directions and objects for the exploratory agent."""

# Import modules to register metrics
import src.metrics.builtin  # noqa: F401
