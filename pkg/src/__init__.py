"""Exploratory level evaluation - WFC level generation scored by metric-driven agents."""

from src.orchestrator import ExperimentOrchestrator
from src.metrics.registry import MetricRegistry, register_metric

__all__ = [
    "ExperimentOrchestrator",
    "MetricRegistry",
    "register_metric",
]
