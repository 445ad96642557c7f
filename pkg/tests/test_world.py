import numpy as np
import pytest

from conftest import DECORATED, FLAT, HIGH, MESA, SLOPE, box, flat_level, grid_of, level_with_heights, make_tileset

from src.core.errors import LevelStructureError, LevelValidationError, RaycastError
from src.core.world import LATTICE, PlacedTile, WorldObject, build_level, max_terrain_height, raycast, raycast_many


def _wall_heights(height: float = 10.0) -> np.ndarray:
    """Flat ground that steps up to `height` at x = 150 (lattice column 30)."""
    heights = np.zeros((LATTICE, LATTICE))
    heights[:, 30:] = height
    return heights


# --- Construction ---

def test_flat_level_is_all_walkable_ground():
    level = flat_level()

    assert level.heightfield.shape == (71, 71)
    assert np.all(level.heightfield == 0.0)
    assert level.nav_grid.cells.shape == (70, 70)
    assert level.nav_grid.cells.all()
    assert level.objects == ()


def test_slope_row_joins_high_ground_to_low_ground():
    overrides = {(0, c): (HIGH, 0) for c in range(7)} | {(1, c): (SLOPE, 0) for c in range(7)}
    level = build_level(grid_of(FLAT, overrides), make_tileset())

    assert level.height_at(100.0, 10.0) == pytest.approx(10.0)
    assert level.height_at(100.0, 75.0) == pytest.approx(5.0)
    assert level.height_at(100.0, 200.0) == pytest.approx(0.0)
    # a 10-unit drop over 50 units rises 1 unit per cell
    assert level.nav_grid.cells[12, 10]


def test_high_tile_among_flat_tiles_fails_validation():
    with pytest.raises(LevelValidationError) as info:
        build_level(grid_of(FLAT, {(3, 3): (HIGH, 0)}), make_tileset())

    assert set(info.value.positions) == {
        ((2, 3), (3, 3)),
        ((3, 2), (3, 3)),
        ((3, 3), (3, 4)),
        ((3, 3), (4, 3)),
    }


def test_cliff_inside_a_tile_with_matching_edges_passes():
    level = build_level(grid_of(FLAT, {(3, 3): (MESA, 0)}), make_tileset())

    assert level.heightfield[35, 35] == pytest.approx(20.0)
    assert not level.nav_grid.cells[31, 30]
    assert level.nav_grid.cells[35, 35]


def test_wrong_grid_shape_is_rejected():
    grid = grid_of()[:6]
    with pytest.raises(LevelStructureError):
        build_level(grid, make_tileset())


def test_unknown_tile_id_is_rejected():
    with pytest.raises(LevelStructureError, match="unknown tile id 99"):
        build_level(grid_of(FLAT, {(0, 0): (99, 0)}), make_tileset())


def test_invalid_rotation_is_rejected():
    with pytest.raises(LevelStructureError):
        PlacedTile(0, 45, (0, 0))


def test_decoration_rotates_with_its_tile():
    level = build_level(grid_of(FLAT, {(1, 2): (DECORATED, 90)}), make_tileset())

    assert len(level.objects) == 1
    obj = level.objects[0]
    assert obj.id == "obj-1-2-0"
    assert obj.kind == "crate"
    assert obj.position == pytest.approx((130.0, 3.0, 60.0))
    assert obj.size == (8.0, 6.0, 4.0)


def test_blocking_footprint_removes_nav_cells():
    level = build_level(grid_of(FLAT, {(1, 2): (DECORATED, 90)}), make_tileset())

    assert not level.nav_grid.cells[11, 25]
    assert not level.nav_grid.cells[12, 26]
    assert level.nav_grid.cells[10, 25]
    assert level.nav_grid.cells[11, 24]


def test_non_blocking_object_keeps_cells_walkable():
    level = flat_level([box("bush", 100.0, 100.0, size=6.0, kind="bush", blocking=False)])

    assert level.nav_grid.cells.all()


def test_object_outside_bounds_is_rejected():
    with pytest.raises(LevelStructureError):
        flat_level([WorldObject("far", "crate", (400.0, 1.0, 10.0), (2.0, 2.0, 2.0))])


def test_fingerprint_is_stable_and_sensitive_to_objects():
    first = flat_level([box("a", 50.0, 50.0)])
    second = flat_level([box("a", 50.0, 50.0)])
    moved = flat_level([box("a", 60.0, 50.0)])

    assert first.fingerprint() == second.fingerprint()
    assert first.fingerprint() != moved.fingerprint()


def test_footprint_distance_is_zero_inside():
    obj = box("a", 50.0, 50.0, size=4.0)

    assert obj.footprint_distance(51.0, 49.0) == 0.0
    assert obj.footprint_distance(62.0, 50.0) == pytest.approx(10.0)


# --- Ray casting ---

def test_downward_ray_hits_ground_below():
    hit = raycast(flat_level(), (100.0, 10.0, 100.0), (0.0, -1.0, 0.0), 50.0)

    assert hit is not None
    assert hit.is_terrain
    assert hit.distance == pytest.approx(10.0, abs=0.5)


def test_ray_hits_near_face_of_blocking_box():
    level = flat_level([box("wall", 150.0, 100.0, size=10.0)])

    hit = raycast(level, (100.0, 2.0, 100.0), (1.0, 0.0, 0.0), 115.0)

    assert hit is not None
    assert hit.object_id == "wall"
    assert hit.distance == pytest.approx(45.0, abs=1.0)


def test_ignored_object_is_transparent():
    level = flat_level([box("wall", 150.0, 100.0, size=10.0)])

    assert raycast(level, (100.0, 2.0, 100.0), (1.0, 0.0, 0.0), 115.0, ignore=("wall",)) is None


def test_horizontal_ray_over_flat_ground_misses():
    assert raycast(flat_level(), (100.0, 2.0, 100.0), (0.0, 0.0, 1.0), 115.0) is None


def test_ray_leaving_the_level_stops_hitting_terrain():
    assert raycast(flat_level(), (10.0, 2.0, 100.0), (-1.0, -0.01, 0.0), 115.0) is None


def test_ray_strikes_rising_terrain():
    level = level_with_heights(_wall_heights())

    hit = raycast(level, (100.0, 2.0, 100.0), (1.0, 0.0, 0.0), 115.0)

    assert hit is not None and hit.is_terrain
    assert hit.distance == pytest.approx(46.0, abs=0.5)
    assert max_terrain_height(level, (100.0, 2.0, 100.0), (1.0, 0.0, 0.0), hit.distance, 115.0) == pytest.approx(10.0)


def test_batched_rays_match_single_rays():
    level = flat_level([box("wall", 150.0, 100.0, size=10.0)])
    origins = [(100.0, 2.0, 100.0)] * 3
    directions = [(1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 1.0)]

    hits = raycast_many(level, origins, directions, [115.0] * 3)

    for origin, direction, hit in zip(origins, directions, hits):
        single = raycast(level, origin, direction, 115.0)
        assert (hit is None) == (single is None)
        if hit is not None:
            assert hit.distance == pytest.approx(single.distance)


@pytest.mark.parametrize(
    "origin, direction, max_dist",
    [
        ((-1.0, 2.0, 100.0), (1.0, 0.0, 0.0), 10.0),
        ((100.0, 2.0, 100.0), (0.0, 0.0, 0.0), 10.0),
        ((100.0, 2.0, 100.0), (1.0, 0.0, 0.0), 0.0),
    ],
)
def test_malformed_rays_are_rejected(origin, direction, max_dist):
    with pytest.raises(RaycastError):
        raycast(flat_level(), origin, direction, max_dist)


def test_footprint_distance_broadcasts_over_positions():
    obj = box("a", 50.0, 50.0, size=4.0)
    xs = np.array([51.0, 62.0, 40.0, 55.0])
    zs = np.array([49.0, 50.0, 40.0, 62.0])

    distances = obj.footprint_distance(xs, zs)

    assert distances.shape == (4,)
    for x, z, d in zip(xs, zs, distances):
        assert d == pytest.approx(obj.footprint_distance(float(x), float(z)))


@pytest.mark.parametrize(
    "level_factory, origin, direction",
    [
        (lambda: flat_level([box("wall", 150.0, 100.0, size=10.0)]), (100.0, 2.0, 100.0), (1.0, 0.0, 0.0)),
        (lambda: flat_level(), (100.0, 10.0, 100.0), (0.3, -1.0, 0.2)),
        (lambda: level_with_heights(_wall_heights()), (100.0, 2.0, 100.0), (1.0, 0.05, 0.0)),
    ],
)
def test_shortening_a_ray_only_turns_hits_into_misses(level_factory, origin, direction):
    level = level_factory()
    full = raycast(level, origin, direction, 115.0)
    assert full is not None

    for max_dist in np.linspace(115.0, 1.0, 40):
        shorter = raycast(level, origin, direction, float(max_dist))
        if max_dist >= full.distance + 1e-6:
            assert shorter is not None
            assert shorter.distance == pytest.approx(full.distance, abs=1e-6)
            assert shorter.object_id == full.object_id
        elif max_dist < full.distance - 1e-6:
            assert shorter is None
