"""Shared fixtures: hand-built tilesets and levels small enough to reason about."""

import numpy as np
import pytest

from src.core.agent import AgentParams, TickRecord, TraceLog
from src.core.perception import AgentPose, ViewParams
from src.core.tiles import Decoration, ElevationProfile, TileDef, TileSet
from src.core.wfcgen import default_tileset
from src.core.world import LATTICE, NAV_CELLS, Level, NavGrid, PlacedTile, WorldObject, build_level

COMPATIBILITY = {
    "low": frozenset({"low"}),
    "high": frozenset({"high"}),
    "ramp_up": frozenset({"ramp_down"}),
    "ramp_down": frozenset({"ramp_up"}),
}

FLAT, HIGH, SLOPE, MESA, DECORATED = range(5)


def make_tileset() -> TileSet:
    """Five tiles: flat, high ground, a slope, a cliff-sided mesa and a decorated flat."""
    tiles = (
        TileDef(FLAT, "flat", ("low",) * 4, 1.0, 1.0),
        TileDef(HIGH, "high", ("high",) * 4, 1.0, 1.0, ElevationProfile((10.0, 10.0, 10.0, 10.0))),
        TileDef(
            SLOPE,
            "slope",
            ("high", "ramp_down", "low", "ramp_up"),
            1.0,
            1.0,
            ElevationProfile((10.0, 10.0, 0.0, 0.0), "slope"),
        ),
        TileDef(MESA, "mesa", ("low",) * 4, 1.0, 1.0, ElevationProfile(interior="plateau", plateau_height=20.0)),
        TileDef(
            DECORATED,
            "decorated",
            ("low",) * 4,
            1.0,
            1.0,
            decorations=(Decoration("crate", (10.0, 20.0), (4.0, 6.0, 8.0)),),
            category="decorated",
        ),
    )
    return TileSet(tiles=tiles, compatibility=COMPATIBILITY, name="test")


def grid_of(tile_id: int = FLAT, overrides: dict[tuple[int, int], tuple[int, int]] | None = None) -> list[list[PlacedTile]]:
    """7x7 grid of one tile; overrides map (row, col) to (tile_id, rotation)."""
    overrides = overrides or {}
    return [
        [PlacedTile(*overrides.get((r, c), (tile_id, 0)), (r, c)) for c in range(7)]
        for r in range(7)
    ]


def flat_level(objects: list[WorldObject] | None = None, level_id: str = "flat") -> Level:
    return build_level(grid_of(), make_tileset(), level_id=level_id, objects_override=objects or [])


def box(object_id: str, x: float, z: float, size: float = 2.0, kind: str = "crate", blocking: bool = True) -> WorldObject:
    """A cube resting on flat ground."""
    return WorldObject(object_id, kind, (x, size / 2, z), (size, size, size), blocking)


def level_with_heights(heightfield: np.ndarray, level_id: str = "custom") -> Level:
    """A level over an arbitrary 71x71 heightfield, every cell walkable."""
    assert heightfield.shape == (LATTICE, LATTICE)
    return Level(
        id=level_id,
        tiles=(),
        objects=(),
        heightfield=heightfield,
        nav_grid=NavGrid(cells=np.ones((NAV_CELLS, NAV_CELLS), dtype=bool)),
    )


def make_trace(points: list[tuple[float, float]], visible: list[tuple[str, ...]] | None = None, kinds=None) -> TraceLog:
    """A trace whose ticks sit at the given (x, z) points."""
    visible = visible or [()] * len(points)
    trace = TraceLog(header={"config": "test", "object_kinds": dict(kinds or {}), "params": {"tick": 0.1}})
    for k, ((x, z), seen) in enumerate(zip(points, visible)):
        trace.ticks.append(TickRecord(k=k, t=round(k * 0.1, 6), position=(x, 2.0, z), heading=0.0, visible=seen, cell=(0, 0)))
    return trace


@pytest.fixture
def tileset() -> TileSet:
    return make_tileset()


@pytest.fixture
def shipped_tileset() -> TileSet:
    return default_tileset()


@pytest.fixture
def view() -> ViewParams:
    return ViewParams(length_of_view=115.0, field_of_view=90.0)


@pytest.fixture
def pose() -> AgentPose:
    """Eye two units above flat ground at (100, 100), looking along +x."""
    return AgentPose((100.0, 2.0, 100.0), 0.0)


@pytest.fixture
def params() -> AgentParams:
    return AgentParams(sim_duration=5.0)
