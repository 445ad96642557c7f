import math

import numpy as np
import pytest

from conftest import box, flat_level

from src.core.perception import (
    AgentPose,
    ViewParams,
    bucket_objects,
    nearest_direction,
    sample_fan,
    visible_objects,
    wrap_angle,
)


def test_fan_has_36_unit_directions(pose, view):
    fan = sample_fan(pose, view)

    assert len(fan.angles) == 36
    assert fan.angles[9] == pytest.approx(90.0)
    for direction in fan.directions:
        assert math.hypot(direction[0], direction[2]) == pytest.approx(1.0)
        assert direction[1] == 0.0


def test_fov_mask_uses_closed_cone(pose, view):
    fan = sample_fan(pose, view)

    assert fan.in_fov_indices() == [0, 1, 2, 3, 4, 32, 33, 34, 35]


def test_fov_mask_follows_heading(view):
    fan = sample_fan(AgentPose((100.0, 2.0, 100.0), 5.0), view)

    assert fan.in_fov_indices() == [0, 1, 2, 3, 4, 5, 32, 33, 34, 35]


def test_full_circle_view_sees_every_direction(pose):
    assert len(sample_fan(pose, ViewParams(field_of_view=360.0)).in_fov_indices()) == 36


def test_narrow_view_keeps_the_nearest_direction():
    fan = sample_fan(AgentPose((100.0, 2.0, 100.0), 14.0), ViewParams(field_of_view=4.0))

    assert fan.in_fov_indices() == [1]


@pytest.mark.parametrize("length, fov", [(0.0, 90.0), (115.0, 0.0), (115.0, 400.0)])
def test_invalid_view_params_are_rejected(length, fov):
    with pytest.raises(ValueError):
        ViewParams(length_of_view=length, field_of_view=fov)


def test_wrap_angle_range():
    assert wrap_angle(190.0) == pytest.approx(-170.0)
    assert wrap_angle(-180.0) == pytest.approx(180.0)
    assert wrap_angle(720.0) == pytest.approx(0.0)
    assert nearest_direction(-42.0) == 32


def test_objects_outside_range_or_cone_are_not_visible(pose, view):
    level = flat_level([
        box("ahead", 150.0, 100.0),
        box("far", 250.0, 100.0),
        box("behind", 50.0, 100.0),
        box("side", 100.0, 150.0),
    ])

    assert [obj.id for obj in visible_objects(level, pose, view)] == ["ahead"]


def test_blocking_object_hides_what_is_behind_it(pose, view):
    level = flat_level([
        box("wall", 130.0, 100.0, size=10.0),
        box("hidden", 170.0, 100.0),
        box("clear", 170.0, 130.0),
    ])

    assert [obj.id for obj in visible_objects(level, pose, view)] == ["wall", "clear"]


def test_non_blocking_object_does_not_occlude(pose, view):
    level = flat_level([
        box("bush", 130.0, 100.0, size=10.0, kind="bush", blocking=False),
        box("crate", 170.0, 100.0),
    ])

    assert [obj.id for obj in visible_objects(level, pose, view)] == ["bush", "crate"]


def test_objects_are_bucketed_by_nearest_direction(pose, view):
    fan = sample_fan(pose, view)
    at_20 = box("a", 100.0 + 50.0 * math.cos(math.radians(21)), 100.0 + 50.0 * math.sin(math.radians(21)))
    at_0 = box("b", 160.0, 101.0)

    buckets = bucket_objects(fan, pose, [at_20, at_0])

    assert [o.id for o in buckets[2]] == ["a"]
    assert [o.id for o in buckets[0]] == ["b"]


def test_object_nearest_to_an_out_of_view_direction_moves_inside(pose, view):
    fan = sample_fan(pose, view)
    edge = box("edge", 100.0 + 50.0 * math.cos(math.radians(46)), 100.0 + 50.0 * math.sin(math.radians(46)))

    assert [o.id for o in bucket_objects(fan, pose, [edge])[4]] == ["edge"]


def _crowded_level(seed: int):
    rng = np.random.default_rng(seed)
    objects = []
    for i in range(30):
        x, z = rng.uniform(20.0, 330.0, size=2)
        if math.hypot(x - 175.0, z - 175.0) < 8.0:
            continue
        objects.append(box(f"o{i}", float(x), float(z), size=float(rng.uniform(1.0, 8.0)), blocking=bool(i % 3)))
    return flat_level(objects)


@pytest.mark.parametrize("heading", [0.0, 37.5, 123.0, 250.0, -80.0])
def test_full_turn_of_heading_changes_nothing(heading, view):
    level = _crowded_level(int(heading) % 7)
    pose = AgentPose((175.0, 2.0, 175.0), heading)
    turned = AgentPose((175.0, 2.0, 175.0), heading + 360.0)

    assert np.array_equal(sample_fan(pose, view).in_fov, sample_fan(turned, view).in_fov)
    assert [o.id for o in visible_objects(level, pose, view)] == [o.id for o in visible_objects(level, turned, view)]


@pytest.mark.parametrize("seed", range(5))
def test_longer_view_never_loses_objects(seed):
    level = _crowded_level(seed)
    pose = AgentPose((175.0, 2.0, 175.0), 72.0 * seed)

    previous: set[str] = set()
    for length in (20.0, 60.0, 115.0, 200.0, 500.0):
        seen = {o.id for o in visible_objects(level, pose, ViewParams(length_of_view=length))}
        assert previous <= seen
        previous = seen
