"""
Agent senses: the camera cone over visible objects and the 36-direction fan.

Yaw 0 points along +x and angles grow toward +z.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from src.core.world import Level, WorldObject, raycast_many

DIRECTION_COUNT = 36
DIRECTION_STEP = 360.0 / DIRECTION_COUNT
ANGLE_EPS = 1e-9


def wrap_angle(angle: float) -> float:
    """Map an angle in degrees onto (-180, 180]."""
    wrapped = math.fmod(angle + 180.0, 360.0)
    if wrapped <= 0:
        wrapped += 360.0
    return wrapped - 180.0


def yaw_vector(yaw: float) -> tuple[float, float, float]:
    rad = math.radians(yaw)
    return math.cos(rad), 0.0, math.sin(rad)


@dataclass(frozen=True)
class AgentPose:
    """Eye position (x, y, z) and world-frame yaw in degrees."""

    position: tuple[float, float, float]
    heading: float


@dataclass(frozen=True)
class ViewParams:
    length_of_view: float = 115.0
    field_of_view: float = 90.0

    def __post_init__(self) -> None:
        if self.length_of_view <= 0:
            raise ValueError(f"length_of_view must be positive, got {self.length_of_view}")
        if not 0 < self.field_of_view <= 360:
            raise ValueError(f"field_of_view must lie in (0, 360], got {self.field_of_view}")


@dataclass(frozen=True, eq=False)
class DirectionFan:
    angles: np.ndarray
    directions: np.ndarray
    in_fov: np.ndarray = field(repr=False)

    def in_fov_indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.in_fov)]


_ANGLES = np.arange(DIRECTION_COUNT) * DIRECTION_STEP
_DIRECTIONS = np.stack(
    [np.cos(np.radians(_ANGLES)), np.zeros(DIRECTION_COUNT), np.sin(np.radians(_ANGLES))], axis=1
)


def in_view_cone(angle: float, heading: float, field_of_view: float) -> bool:
    return abs(wrap_angle(angle - heading)) <= field_of_view / 2 + ANGLE_EPS


def sample_fan(pose: AgentPose, view: ViewParams) -> DirectionFan:
    """
    The 36 world-frame directions, masked by the camera cone.

    Args:
        pose: Agent pose supplying the heading
        view: Camera parameters

    Returns:
        DirectionFan whose in_fov mask uses the closed interval heading +/- fov/2
    """
    if view.field_of_view >= 360:
        mask = np.ones(DIRECTION_COUNT, dtype=bool)
    else:
        mask = np.array([in_view_cone(a, pose.heading, view.field_of_view) for a in _ANGLES])
        if not mask.any():
            mask[nearest_direction(pose.heading)] = True
    return DirectionFan(angles=_ANGLES.copy(), directions=_DIRECTIONS.copy(), in_fov=mask)


def horizontal_offset(pose: AgentPose, obj: WorldObject) -> tuple[float, float, float]:
    """(dx, dz, distance) from the agent to an object centre in the ground plane."""
    dx = obj.position[0] - pose.position[0]
    dz = obj.position[2] - pose.position[2]
    return dx, dz, math.hypot(dx, dz)


def visible_objects(level: Level, pose: AgentPose, view: ViewParams) -> list[WorldObject]:
    """
    Objects inside the camera cone and not hidden behind terrain or other objects.

    Args:
        level: World to look into
        pose: Agent eye position and heading
        view: Camera parameters

    Returns:
        Visible objects ordered by distance, then id
    """
    if not level.objects:
        return []
    centers = level.object_centers
    near = np.hypot(centers[:, 0] - pose.position[0], centers[:, 2] - pose.position[2]) <= view.length_of_view + 1e-6

    candidates: list[tuple[float, WorldObject]] = []
    for obj in (level.objects[i] for i in np.flatnonzero(near)):
        dx, dz, dist = horizontal_offset(pose, obj)
        if dist > view.length_of_view:
            continue
        if dist > ANGLE_EPS and not in_view_cone(math.degrees(math.atan2(dz, dx)), pose.heading, view.field_of_view):
            continue
        candidates.append((dist, obj))
    if not candidates:
        return []

    eye = np.asarray(pose.position, dtype=float)
    rays = []
    for index, (_, obj) in enumerate(candidates):
        offset = np.asarray(obj.position, dtype=float) - eye
        length = float(np.linalg.norm(offset))
        if length > ANGLE_EPS:
            rays.append((index, offset, length))

    occluded = set()
    if rays:
        hits = raycast_many(
            level,
            [eye] * len(rays),
            [offset for _, offset, _ in rays],
            [length for _, _, length in rays],
            ignore=[(candidates[index][1].id,) for index, _, _ in rays],
        )
        for (index, _, length), hit in zip(rays, hits):
            if hit is not None and hit.distance < length - 1e-6:
                occluded.add(index)

    visible = [(dist, obj) for index, (dist, obj) in enumerate(candidates) if index not in occluded]
    visible.sort(key=lambda item: (item[0], item[1].id))
    return [obj for _, obj in visible]


def nearest_direction(angle: float) -> int:
    return int(round(angle / DIRECTION_STEP)) % DIRECTION_COUNT


def bucket_objects(fan: DirectionFan, pose: AgentPose, objects: list[WorldObject]) -> dict[int, list[WorldObject]]:
    """Assign each object to its nearest in-FOV direction, keeping input order per bucket."""
    allowed = fan.in_fov_indices()
    buckets: dict[int, list[WorldObject]] = {}
    if not allowed:
        return buckets
    for obj in objects:
        dx, dz, dist = horizontal_offset(pose, obj)
        angle = math.degrees(math.atan2(dz, dx)) if dist > ANGLE_EPS else pose.heading
        index = nearest_direction(angle)
        if not fan.in_fov[index]:
            index = min(allowed, key=lambda i: (abs(wrap_angle(fan.angles[i] - angle)), i))
        buckets.setdefault(index, []).append(obj)
    return buckets
