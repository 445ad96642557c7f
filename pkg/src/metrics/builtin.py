"""Built-in motivation metrics: two direction-based, three object-based."""

import math

import numpy as np

from src.core.perception import horizontal_offset
from src.core.world import WorldObject, max_terrain_height, raycast
from src.metrics.registry import register_metric
from src.metrics.scoring import MetricContext, MetricState

ELEVATION_STEP = 0.1
GROUP_STEP = 0.1


def _clamp(value: float) -> float:
    return min(max(value, 0.0), 1.0)


@register_metric("elevation", scope="direction")
def elevation_change(ctx: MetricContext, direction: np.ndarray) -> float:
    """
    0.1 per unit the struck terrain rises above the agent's eye, capped at 1.

    The struck feature is measured at its crest: the highest heightfield value
    along the ray from the strike point to the view limit.
    """
    eye = ctx.pose.position
    hit = raycast(ctx.level, eye, direction, ctx.view.length_of_view)
    if hit is None or not hit.is_terrain:
        return 0.0
    crest = max_terrain_height(ctx.level, eye, direction, hit.distance, ctx.view.length_of_view)
    crest = max(crest, hit.point[1])
    return _clamp(ELEVATION_STEP * (crest - eye[1]))


@register_metric("openness", scope="direction")
def openness(ctx: MetricContext, direction: np.ndarray) -> float:
    """Hit distance as a fraction of the view length; a miss scores 0."""
    hit = raycast(ctx.level, ctx.pose.position, direction, ctx.view.length_of_view)
    if hit is None:
        return 0.0
    return _clamp(hit.distance / ctx.view.length_of_view)


def concealed_fraction(extent: float, distance: float, length_of_view: float, field_of_view: float) -> float:
    """Sector annulus hidden behind an object, relative to half the view cone area."""
    if distance >= length_of_view or extent <= 0:
        return 0.0
    theta = math.atan(extent / (2 * distance)) if distance > 0 else math.pi / 2
    hidden = theta * (length_of_view ** 2 - distance ** 2)
    cone = math.radians(field_of_view) / 2 * length_of_view ** 2
    return _clamp(hidden / cone)


@register_metric("anticipation", scope="object")
def anticipation_detection(ctx: MetricContext, obj: WorldObject) -> float:
    """Big, near objects that hide unseen space score high."""
    _, _, distance = horizontal_offset(ctx.pose, obj)
    extent = max(obj.size[0], obj.size[2])
    return concealed_fraction(extent, distance, ctx.view.length_of_view, ctx.view.field_of_view)


@register_metric("large-object", scope="object", stateful=True)
def large_object_detection(state: MetricState, obj: WorldObject) -> tuple[float, MetricState]:
    """
    Object volume relative to the largest seen this run.

    Args:
        state: Largest volume seen so far
        obj: Object being scored

    Returns:
        (score, new state); an object at least as large as any before scores 1
    """
    volume = obj.volume
    if state.largest_seen is None or volume >= state.largest_seen:
        return 1.0, MetricState(largest_seen=volume)
    return _clamp(volume / state.largest_seen), state


@register_metric("group", scope="object")
def group_detection(ctx: MetricContext, obj: WorldObject) -> float:
    """0.1 for every other object whose centre lies within the group radius."""
    centers = ctx.level.object_centers
    if len(centers) == 0:
        return 0.0
    distances = np.linalg.norm(centers - np.asarray(obj.position, dtype=float), axis=1)
    ids = [o.id for o in ctx.level.objects]
    neighbours = sum(1 for d, other in zip(distances, ids) if other != obj.id and d <= ctx.group_radius + 1e-9)
    return _clamp(GROUP_STEP * neighbours)
