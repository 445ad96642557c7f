"""
Level representation: a 7x7 grid of 50x50 tiles forming a 350x350 heightfield
world with placed objects and a 5-unit navigation grid.

Coordinates: x grows east, z grows south, y is height. Tile (row, col) covers
x in [50*col, 50*col + 50] and z in [50*row, 50*row + 50].
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from src.core.errors import LevelStructureError, LevelValidationError, RaycastError
from src.core.tiles import SAMPLES_PER_TILE, TILE_SIZE, ROTATIONS, TileSet

logger = logging.getLogger(__name__)

GRID_SIZE = 7
WORLD_SIZE = GRID_SIZE * TILE_SIZE
SAMPLE_SPACING = 5.0
CELL_SIZE = 5.0
NAV_CELLS = int(WORLD_SIZE / CELL_SIZE)
LATTICE = NAV_CELLS + 1
MARCH_STEP = 0.5
DEFAULT_WALKABLE_RISE = 5.0


@dataclass(frozen=True)
class PlacedTile:
    tile_id: int
    rotation: int
    grid_pos: tuple[int, int]

    def __post_init__(self) -> None:
        if self.rotation not in ROTATIONS:
            raise LevelStructureError(f"rotation {self.rotation} at {self.grid_pos} is not one of {ROTATIONS}")


@dataclass(frozen=True)
class WorldObject:
    id: str
    kind: str
    position: tuple[float, float, float]
    size: tuple[float, float, float]
    blocking: bool = True

    @property
    def volume(self) -> float:
        sx, sy, sz = self.size
        return sx * sy * sz

    @property
    def box_min(self) -> tuple[float, float, float]:
        return tuple(p - s / 2 for p, s in zip(self.position, self.size))  # type: ignore[return-value]

    @property
    def box_max(self) -> tuple[float, float, float]:
        return tuple(p + s / 2 for p, s in zip(self.position, self.size))  # type: ignore[return-value]

    def footprint_distance(self, x: float | np.ndarray, z: float | np.ndarray) -> float | np.ndarray:
        """Horizontal distance from (x, z) to the object's footprint (0 inside); broadcasts over arrays."""
        min_x, _, min_z = self.box_min
        max_x, _, max_z = self.box_max
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        dx = np.maximum(np.maximum(min_x - x, 0.0), x - max_x)
        dz = np.maximum(np.maximum(min_z - z, 0.0), z - max_z)
        distance = np.hypot(dx, dz)
        return float(distance) if distance.ndim == 0 else distance


@dataclass(frozen=True, eq=False)
class NavGrid:
    """Boolean walkability lattice indexed [iz, ix]."""

    cells: np.ndarray
    cell_size: float = CELL_SIZE

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape  # type: ignore[return-value]

    def cell_of(self, x: float, z: float) -> tuple[int, int]:
        rows, cols = self.shape
        i = min(max(int(math.floor(z / self.cell_size)), 0), rows - 1)
        j = min(max(int(math.floor(x / self.cell_size)), 0), cols - 1)
        return i, j

    def center_of(self, cell: tuple[int, int]) -> tuple[float, float]:
        i, j = cell
        return (j + 0.5) * self.cell_size, (i + 0.5) * self.cell_size

    def is_walkable(self, x: float, z: float) -> bool:
        if not (0.0 <= x <= WORLD_SIZE and 0.0 <= z <= WORLD_SIZE):
            return False
        return bool(self.cells[self.cell_of(x, z)])


@dataclass(frozen=True)
class RayHit:
    distance: float
    point: tuple[float, float, float]
    object_id: str | None = None

    @property
    def is_terrain(self) -> bool:
        return self.object_id is None


@dataclass(frozen=True, eq=False)
class Level:
    """Immutable world under evaluation."""

    id: str
    tiles: tuple[tuple[PlacedTile, ...], ...]
    objects: tuple[WorldObject, ...]
    heightfield: np.ndarray
    nav_grid: NavGrid
    tileset_ref: str = "default"
    objects_overridden: bool = False
    generator: tuple[str, int] | None = None
    bounds: tuple[float, float] = field(default=(WORLD_SIZE, WORLD_SIZE))

    def in_bounds(self, x: float, z: float) -> bool:
        return 0.0 <= x <= self.bounds[0] and 0.0 <= z <= self.bounds[1]

    def heights_at(self, xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
        """Bilinear heightfield lookup, vectorised; inputs are clipped to bounds."""
        gx = np.clip(np.asarray(xs, dtype=float) / SAMPLE_SPACING, 0.0, LATTICE - 1)
        gz = np.clip(np.asarray(zs, dtype=float) / SAMPLE_SPACING, 0.0, LATTICE - 1)
        ix = np.minimum(np.floor(gx).astype(int), LATTICE - 2)
        iz = np.minimum(np.floor(gz).astype(int), LATTICE - 2)
        fx = gx - ix
        fz = gz - iz
        hf = self.heightfield
        return (
            hf[iz, ix] * (1 - fx) * (1 - fz)
            + hf[iz, ix + 1] * fx * (1 - fz)
            + hf[iz + 1, ix] * (1 - fx) * fz
            + hf[iz + 1, ix + 1] * fx * fz
        )

    def height_at(self, x: float, z: float) -> float:
        return float(self.heights_at(np.array([x]), np.array([z]))[0])

    @cached_property
    def object_index(self) -> dict[str, WorldObject]:
        return {obj.id: obj for obj in self.objects}

    @cached_property
    def object_centers(self) -> np.ndarray:
        return np.array([obj.position for obj in self.objects], dtype=float).reshape(-1, 3)

    @cached_property
    def blocking_boxes(self) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
        blocking = [obj for obj in self.objects if obj.blocking]
        mins = np.array([obj.box_min for obj in blocking], dtype=float).reshape(-1, 3)
        maxs = np.array([obj.box_max for obj in blocking], dtype=float).reshape(-1, 3)
        return mins, maxs, tuple(obj.id for obj in blocking)

    def fingerprint(self) -> str:
        """SHA-256 over geometry, navigation and the object catalogue."""
        digest = hashlib.sha256()
        digest.update(self.id.encode("utf-8"))
        digest.update(np.ascontiguousarray(self.heightfield, dtype="<f8").tobytes())
        digest.update(np.ascontiguousarray(self.nav_grid.cells, dtype=np.uint8).tobytes())
        for obj in self.objects:
            digest.update(repr((obj.id, obj.kind, obj.position, obj.size, obj.blocking)).encode("utf-8"))
        return digest.hexdigest()


# --- Construction ---

def _rotate_local(u: float, v: float, quarter_turns: int) -> tuple[float, float]:
    for _ in range(quarter_turns):
        u, v = TILE_SIZE - v, u
    return u, v


def _edge_mismatches(local: list[list[np.ndarray]]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    bad = []
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            here = local[row][col]
            if col + 1 < GRID_SIZE and not np.allclose(here[:, -1], local[row][col + 1][:, 0], atol=1e-9):
                bad.append(((row, col), (row, col + 1)))
            if row + 1 < GRID_SIZE and not np.allclose(here[-1, :], local[row + 1][col][0, :], atol=1e-9):
                bad.append(((row, col), (row + 1, col)))
    return bad


def derive_nav_grid(
    heightfield: np.ndarray,
    objects: Iterable[WorldObject],
    walkable_rise: float = DEFAULT_WALKABLE_RISE,
) -> NavGrid:
    """Walkable iff the cell's corner heights differ by at most `walkable_rise`
    and no blocking footprint overlaps the cell interior."""
    corners = np.stack(
        [heightfield[:-1, :-1], heightfield[:-1, 1:], heightfield[1:, :-1], heightfield[1:, 1:]]
    )
    cells = (corners.max(axis=0) - corners.min(axis=0)) <= walkable_rise + 1e-9
    for obj in objects:
        if not obj.blocking:
            continue
        min_x, _, min_z = obj.box_min
        max_x, _, max_z = obj.box_max
        j0 = max(int(math.floor(min_x / CELL_SIZE)), 0)
        j1 = min(int(math.ceil(max_x / CELL_SIZE)), NAV_CELLS)
        i0 = max(int(math.floor(min_z / CELL_SIZE)), 0)
        i1 = min(int(math.ceil(max_z / CELL_SIZE)), NAV_CELLS)
        cells[i0:i1, j0:j1] = False
    return NavGrid(cells=cells)


def build_level(
    tiles: Sequence[Sequence[PlacedTile]],
    tileset: TileSet,
    level_id: str = "level",
    tileset_ref: str = "default",
    objects_override: Sequence[WorldObject] | None = None,
    walkable_rise: float = DEFAULT_WALKABLE_RISE,
    generator: tuple[str, int] | None = None,
) -> Level:
    """
    Assemble a Level from a 7x7 grid of placed tiles.

    Args:
        tiles: Row-major 7x7 grid of PlacedTile
        tileset: Tile vocabulary the tile ids index into
        level_id: Identifier of the resulting level
        tileset_ref: Name recorded for serialisation
        objects_override: Replaces the objects derived from tile decorations
        walkable_rise: Maximum rise across one nav cell
        generator: Optional (preset, seed) provenance

    Returns:
        The constructed Level

    Raises:
        LevelStructureError: wrong grid shape, unknown tile id, object out of bounds
        LevelValidationError: adjacent tiles disagree on a shared edge
    """
    if len(tiles) != GRID_SIZE or any(len(row) != GRID_SIZE for row in tiles):
        raise LevelStructureError(f"level '{level_id}' must be a {GRID_SIZE}x{GRID_SIZE} grid")

    local: list[list[np.ndarray]] = []
    for row_index, row in enumerate(tiles):
        local_row = []
        for col_index, placed in enumerate(row):
            if placed.grid_pos != (row_index, col_index):
                raise LevelStructureError(
                    f"tile at ({row_index}, {col_index}) claims grid position {placed.grid_pos}"
                )
            if not 0 <= placed.tile_id < len(tileset):
                raise LevelStructureError(f"unknown tile id {placed.tile_id} at {placed.grid_pos}")
            local_row.append(tileset.tiles[placed.tile_id].rotated_heights(placed.rotation))
        local.append(local_row)

    mismatches = _edge_mismatches(local)
    if mismatches:
        listing = ", ".join(f"{a}-{b}" for a, b in mismatches)
        raise LevelValidationError(f"edge heights disagree between {listing}", mismatches)

    step = SAMPLES_PER_TILE - 1
    heightfield = np.zeros((LATTICE, LATTICE))
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            heightfield[row * step: row * step + SAMPLES_PER_TILE, col * step: col * step + SAMPLES_PER_TILE] = local[row][col]

    ground = Level(
        id=level_id,
        tiles=(),
        objects=(),
        heightfield=heightfield,
        nav_grid=NavGrid(cells=np.ones((NAV_CELLS, NAV_CELLS), dtype=bool)),
    )

    if objects_override is not None:
        objects = tuple(objects_override)
    else:
        derived = []
        for row in tiles:
            for placed in row:
                tile = tileset.tiles[placed.tile_id]
                quarter_turns = placed.rotation // 90
                r, c = placed.grid_pos
                for k, deco in enumerate(tile.decorations):
                    u, v = _rotate_local(deco.anchor[0], deco.anchor[1], quarter_turns)
                    sx, sy, sz = deco.size
                    if quarter_turns % 2:
                        sx, sz = sz, sx
                    x = c * TILE_SIZE + u
                    z = r * TILE_SIZE + v
                    y = ground.height_at(x, z) + sy / 2
                    derived.append(WorldObject(f"obj-{r}-{c}-{k}", deco.kind, (x, y, z), (sx, sy, sz), deco.blocking))
        objects = tuple(derived)

    for obj in objects:
        if not ground.in_bounds(obj.position[0], obj.position[2]):
            raise LevelStructureError(f"object {obj.id} at {obj.position} lies outside the level bounds")

    nav_grid = derive_nav_grid(heightfield, objects, walkable_rise)
    level = Level(
        id=level_id,
        tiles=tuple(tuple(row) for row in tiles),
        objects=objects,
        heightfield=heightfield,
        nav_grid=nav_grid,
        tileset_ref=tileset_ref,
        objects_overridden=objects_override is not None,
        generator=generator,
    )
    logger.debug(f"Built level '{level_id}' with {len(objects)} objects, {int(nav_grid.cells.sum())} walkable cells")
    return level


# --- Ray casting ---

def _terrain_crossings(level: Level, origins: np.ndarray, dirs: np.ndarray, max_dists: np.ndarray) -> np.ndarray:
    steps = np.ceil(max_dists / MARCH_STEP).astype(int)
    j = np.arange(1, int(steps.max()) + 1)
    t = np.minimum(j[None, :] * MARCH_STEP, max_dists[:, None])
    valid = j[None, :] <= steps[:, None]
    px = origins[:, 0, None] + t * dirs[:, 0, None]
    py = origins[:, 1, None] + t * dirs[:, 1, None]
    pz = origins[:, 2, None] + t * dirs[:, 2, None]
    inside = (px >= 0) & (px <= level.bounds[0]) & (pz >= 0) & (pz <= level.bounds[1])
    below = valid & inside & (py < level.heights_at(px, pz))

    result = np.full(len(origins), np.inf)
    start_below = origins[:, 1] < level.heights_at(origins[:, 0], origins[:, 2])
    result[start_below] = 0.0

    rays = np.flatnonzero(below.any(axis=1) & ~start_below)
    if rays.size == 0:
        return result
    k = below[rays].argmax(axis=1)
    hi = t[rays, k]
    lo = np.where(k > 0, t[rays, np.maximum(k - 1, 0)], 0.0)
    o = origins[rays]
    d = dirs[rays]
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        mx = o[:, 0] + mid * d[:, 0]
        my = o[:, 1] + mid * d[:, 1]
        mz = o[:, 2] + mid * d[:, 2]
        under = my < level.heights_at(mx, mz)
        hi = np.where(under, mid, hi)
        lo = np.where(under, lo, mid)
    result[rays] = hi
    return result


def _box_crossings(
    level: Level,
    origins: np.ndarray,
    dirs: np.ndarray,
    max_dists: np.ndarray,
    ignore: Sequence[Iterable[str]] | None,
) -> tuple[np.ndarray, np.ndarray]:
    mins, maxs, ids = level.blocking_boxes
    n = len(origins)
    if len(ids) == 0:
        return np.full(n, np.inf), np.full(n, -1)

    o = origins[:, None, :]
    d = dirs[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (mins[None, :, :] - o) / d
        t2 = (maxs[None, :, :] - o) / d
    near = np.minimum(t1, t2)
    far = np.maximum(t1, t2)
    parallel = np.abs(d) < 1e-12
    within = (o >= mins[None, :, :]) & (o <= maxs[None, :, :])
    near = np.where(parallel, np.where(within, -np.inf, np.inf), near)
    far = np.where(parallel, np.where(within, np.inf, -np.inf), far)
    t_enter = near.max(axis=2)
    t_exit = far.min(axis=2)
    hit = (t_enter <= t_exit) & (t_exit >= 0) & (t_enter <= max_dists[:, None])

    if ignore is not None:
        position = {object_id: index for index, object_id in enumerate(ids)}
        for ray, skipped in enumerate(ignore):
            for object_id in skipped:
                if object_id in position:
                    hit[ray, position[object_id]] = False

    t_hit = np.where(hit, np.maximum(t_enter, 0.0), np.inf)
    nearest = t_hit.argmin(axis=1)
    best = t_hit[np.arange(n), nearest]
    return best, np.where(np.isfinite(best), nearest, -1)


def raycast_many(
    level: Level,
    origins: Sequence[Sequence[float]] | np.ndarray,
    directions: Sequence[Sequence[float]] | np.ndarray,
    max_dists: Sequence[float] | np.ndarray,
    ignore: Sequence[Iterable[str]] | None = None,
) -> list[RayHit | None]:
    """Batched raycast against the heightfield and blocking object boxes."""
    origins = np.asarray(origins, dtype=float).reshape(-1, 3)
    dirs = np.asarray(directions, dtype=float).reshape(-1, 3)
    max_dists = np.asarray(max_dists, dtype=float).reshape(-1)
    if len(origins) == 0:
        return []
    if np.any(max_dists <= 0):
        raise RaycastError("max_dist must be positive")
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms < 1e-12):
        raise RaycastError("ray direction must be non-zero")
    dirs = dirs / norms[:, None]
    outside = (origins[:, 0] < 0) | (origins[:, 0] > level.bounds[0]) | (origins[:, 2] < 0) | (origins[:, 2] > level.bounds[1])
    if np.any(outside):
        raise RaycastError(f"ray origin {tuple(origins[np.argmax(outside)])} lies outside the level bounds")

    terrain_t = _terrain_crossings(level, origins, dirs, max_dists)
    object_t, object_idx = _box_crossings(level, origins, dirs, max_dists, ignore)
    ids = level.blocking_boxes[2]

    hits: list[RayHit | None] = []
    for ray in range(len(origins)):
        best = min(terrain_t[ray], object_t[ray])
        if not np.isfinite(best) or best > max_dists[ray]:
            hits.append(None)
            continue
        point = origins[ray] + best * dirs[ray]
        object_id = ids[object_idx[ray]] if object_t[ray] <= terrain_t[ray] else None
        hits.append(RayHit(float(best), (float(point[0]), float(point[1]), float(point[2])), object_id))
    return hits


def raycast(
    level: Level,
    origin: Sequence[float],
    direction: Sequence[float],
    max_dist: float,
    ignore: Iterable[str] = (),
) -> RayHit | None:
    """
    Nearest intersection with the heightfield or a blocking object box.

    Args:
        level: World to cast in
        origin: (x, y, z) start point, inside the level footprint
        direction: Ray direction (normalised here)
        max_dist: Ray length in units
        ignore: Object ids the ray passes through

    Returns:
        RayHit with distance and point, or None for a miss

    Raises:
        RaycastError: origin outside bounds, zero direction or non-positive length
    """
    return raycast_many(level, [origin], [direction], [max_dist], [tuple(ignore)])[0]


def max_terrain_height(
    level: Level,
    origin: Sequence[float],
    direction: Sequence[float],
    start: float,
    stop: float,
) -> float:
    """Highest heightfield value sampled along the horizontal projection of a ray
    between `start` and `stop` units; -inf when the span leaves the level."""
    dx, dz = direction[0], direction[2]
    norm = math.hypot(dx, dz)
    if norm < 1e-12 or stop < start:
        return -math.inf
    t = np.append(np.arange(start, stop, MARCH_STEP), stop)
    xs = origin[0] + t * dx / norm
    zs = origin[2] + t * dz / norm
    inside = (xs >= 0) & (xs <= level.bounds[0]) & (zs >= 0) & (zs <= level.bounds[1])
    if not inside.any():
        return -math.inf
    return float(level.heights_at(xs[inside], zs[inside]).max())
