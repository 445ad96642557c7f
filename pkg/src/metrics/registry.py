"""Metric registry for direction- and object-based motivation metrics."""

from dataclasses import dataclass
from functools import wraps
from typing import Any, Callable, Literal

MetricScope = Literal["direction", "object"]


@dataclass(frozen=True)
class RegisteredMetric:
    name: str
    scope: MetricScope
    func: Callable[..., Any]
    stateful: bool = False


class MetricRegistry:
    """Singleton registry of the metrics an agent can load."""

    _instance: "MetricRegistry | None" = None
    _metrics: dict[str, RegisteredMetric]

    def __new__(cls) -> "MetricRegistry":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._metrics = {}
        return cls._instance

    def register(self, metric: RegisteredMetric) -> None:
        """Register a metric under its name, replacing any previous entry."""
        self._metrics[metric.name] = metric

    def get(self, name: str) -> RegisteredMetric | None:
        return self._metrics.get(name)

    def by_scope(self, scope: MetricScope) -> list[RegisteredMetric]:
        return [m for m in self._metrics.values() if m.scope == scope]

    def names(self) -> list[str]:
        return list(self._metrics)


def register_metric(
    name: str,
    scope: MetricScope,
    stateful: bool = False,
) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """
    Decorator to register a function as a motivation metric.

    Direction metrics are called as ``func(ctx, direction)``, stateless object
    metrics as ``func(ctx, obj)`` and stateful ones as ``func(state, obj)``
    returning ``(score, new_state)``.

    Usage:
        @register_metric("openness", scope="direction")
        def openness(ctx: MetricContext, direction: np.ndarray) -> float:
            ...
    """
    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        MetricRegistry().register(RegisteredMetric(name, scope, func, stateful))

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            return func(*args, **kwargs)

        return wrapper

    return decorator


# Global registry instance
_registry = MetricRegistry()


def get_registry() -> MetricRegistry:
    """Get the global metric registry instance."""
    return _registry
