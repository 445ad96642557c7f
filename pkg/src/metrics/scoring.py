"""Metric configuration, per-run metric state and direction scoring."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.core.perception import AgentPose, ViewParams
from src.core.world import Level, WorldObject
from src.metrics.registry import get_registry

ALL_TOKEN = "all"
RANDOM_TOKEN = "random"


class MetricKind(str, Enum):
    ELEVATION = "elevation"
    OPENNESS = "openness"
    ANTICIPATION = "anticipation"
    LARGE_OBJECT = "large-object"
    GROUP = "group"


@dataclass(frozen=True)
class MetricConfig:
    """Set of active metrics; scores are averaged over them."""

    active: frozenset[MetricKind]

    def __post_init__(self) -> None:
        if not self.active:
            raise ValueError("a metric configuration needs at least one active metric")

    @classmethod
    def from_token(cls, token: str) -> "MetricConfig":
        """Parse a CLI token: one metric name, 'all', or names joined with '+'."""
        if token == ALL_TOKEN:
            return cls(frozenset(MetricKind))
        try:
            return cls(frozenset(MetricKind(part) for part in token.split("+")))
        except ValueError:
            valid = ", ".join([k.value for k in MetricKind] + [ALL_TOKEN])
            raise ValueError(f"unknown metric '{token}' (expected one of: {valid})") from None

    @property
    def ordered(self) -> list[MetricKind]:
        return [kind for kind in MetricKind if kind in self.active]


@dataclass(frozen=True)
class MetricState:
    """Run-scoped memory of the largest object volume seen so far."""

    largest_seen: float | None = None


@dataclass(frozen=True)
class MetricContext:
    """What a metric may look at when scoring one decision."""

    level: Level
    pose: AgentPose
    view: ViewParams
    group_radius: float = 40.0


@dataclass(frozen=True)
class DirectionScore:
    score: float
    state: MetricState
    associated_object: str | None = None


def score_direction(
    config: MetricConfig,
    state: MetricState,
    ctx: MetricContext,
    direction: np.ndarray,
    objects_in_bucket: list[WorldObject],
) -> DirectionScore:
    """
    Mean over the active metrics of one direction's score.

    Direction metrics score the direction itself; each object metric takes the
    maximum over the objects bucketed into this direction, or 0 if none.

    Args:
        config: Active metrics
        state: Metric state before this direction is scored
        ctx: Level, pose and view of the current decision
        direction: Horizontal unit vector
        objects_in_bucket: Visible objects whose nearest direction is this one

    Returns:
        DirectionScore with the mean score, the updated state and the object with
        the highest mean object-metric score (when an object metric is active)
    """
    registry = get_registry()
    direction_scores: list[float] = []
    object_columns: list[list[float]] = []

    for kind in config.ordered:
        metric = registry.get(kind.value)
        if metric is None:
            raise KeyError(f"metric '{kind.value}' is not registered")
        if metric.scope == "direction":
            direction_scores.append(float(metric.func(ctx, direction)))
            continue
        column = []
        for obj in objects_in_bucket:
            if metric.stateful:
                value, state = metric.func(state, obj)
            else:
                value = metric.func(ctx, obj)
            column.append(float(value))
        object_columns.append(column)

    per_metric = direction_scores + [max(column, default=0.0) for column in object_columns]
    score = sum(per_metric) / len(per_metric)

    associated = None
    if object_columns and objects_in_bucket:
        per_object = np.mean(np.array(object_columns), axis=0)
        associated = objects_in_bucket[int(np.argmax(per_object))].id
    return DirectionScore(score=score, state=state, associated_object=associated)
