"""A* pathfinding over the level's navigation grid."""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.core.world import Level

logger = logging.getLogger(__name__)

Cell = tuple[int, int]

SNAP_RADIUS = 2
_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class NavPath:
    """A walkable route: grid cells, their world-space centres and the step count."""

    cells: tuple[Cell, ...]
    waypoints: tuple[tuple[float, float], ...]
    cost: int


def astar(walkable: np.ndarray, start: Cell, goal: Cell) -> list[Cell] | None:
    """
    Shortest 4-connected path on a boolean grid with unit step cost.

    Args:
        walkable: 2-D boolean array, True where a cell may be entered
        start: Start cell (row, col)
        goal: Goal cell (row, col)

    Returns:
        Cells from start to goal inclusive, or None if the goal is unreachable
    """
    rows, cols = walkable.shape
    if not (walkable[start] and walkable[goal]):
        return None
    if start == goal:
        return [start]

    def heuristic(cell: Cell) -> float:
        return math.hypot(cell[0] - goal[0], cell[1] - goal[1])

    counter = itertools.count()
    open_heap: list[tuple[float, int, int, Cell]] = [(heuristic(start), 0, next(counter), start)]
    came_from: dict[Cell, Cell] = {}
    best_g: dict[Cell, int] = {start: 0}
    closed: set[Cell] = set()

    while open_heap:
        _, g, _, cell = heapq.heappop(open_heap)
        if cell in closed:
            continue
        if cell == goal:
            path = [cell]
            while cell in came_from:
                cell = came_from[cell]
                path.append(cell)
            return path[::-1]
        closed.add(cell)
        for di, dj in _NEIGHBOURS:
            nxt = (cell[0] + di, cell[1] + dj)
            if not (0 <= nxt[0] < rows and 0 <= nxt[1] < cols) or not walkable[nxt] or nxt in closed:
                continue
            tentative = g + 1
            if tentative < best_g.get(nxt, math.inf):
                best_g[nxt] = tentative
                came_from[nxt] = cell
                heapq.heappush(open_heap, (tentative + heuristic(nxt), tentative, next(counter), nxt))
    return None


def snap_to_walkable(walkable: np.ndarray, cell: Cell, radius: int = SNAP_RADIUS) -> Cell | None:
    """Nearest walkable cell within Chebyshev `radius`, by Euclidean distance then (row, col)."""
    if walkable[cell]:
        return cell
    rows, cols = walkable.shape
    candidates = []
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            i, j = cell[0] + di, cell[1] + dj
            if 0 <= i < rows and 0 <= j < cols and walkable[i, j]:
                candidates.append((di * di + dj * dj, i, j))
    if not candidates:
        return None
    _, i, j = min(candidates)
    return i, j


def find_path(
    level: Level,
    start: tuple[float, float],
    goal: tuple[float, float],
) -> NavPath | None:
    """
    Route between two world points (x, z) over the level's nav grid.

    Args:
        level: Level to navigate
        start: Start point (x, z)
        goal: Goal point (x, z)

    Returns:
        NavPath, or None when no route exists or an endpoint cannot be snapped

    Raises:
        ValueError: If either point lies outside the level bounds
    """
    for label, (x, z) in (("start", start), ("goal", goal)):
        if not level.in_bounds(x, z):
            raise ValueError(f"{label} point ({x}, {z}) lies outside the level bounds")

    grid = level.nav_grid
    start_cell = snap_to_walkable(grid.cells, grid.cell_of(*start))
    goal_cell = snap_to_walkable(grid.cells, grid.cell_of(*goal))
    if start_cell is None or goal_cell is None:
        logger.warning(f"No walkable cell within {SNAP_RADIUS} cells of {start if start_cell is None else goal}")
        return None

    cells = astar(grid.cells, start_cell, goal_cell)
    if cells is None:
        logger.debug(f"No path from {start_cell} to {goal_cell} in level '{level.id}'")
        return None
    return NavPath(
        cells=tuple(cells),
        waypoints=tuple(grid.center_of(cell) for cell in cells),
        cost=len(cells) - 1,
    )
