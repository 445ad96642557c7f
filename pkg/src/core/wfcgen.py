"""
Tile-level Wave Function Collapse over a 7x7 grid.

Candidates are (tile, rotation) pairs indexed 4 * tile_id + quarter_turns.
Each cell's domain is a boolean mask over all candidates; adjacency is
precomputed as one support matrix per side.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from src.core.errors import TileSetError, WFCContradictionError
from src.core.tiles import ROTATIONS, Preset, TileSet, load_tileset
from src.core.world import GRID_SIZE, PlacedTile
from src.utils.rng import XorShiftRandom

logger = logging.getLogger(__name__)

DEFAULT_TILESET_PATH = Path(__file__).resolve().parent.parent / "data" / "default_tileset.yaml"
MAX_RESTARTS = 100

# Row/col offsets for N, E, S, W
_OFFSETS = ((-1, 0), (0, 1), (1, 0), (0, -1))


class DomainWipeout(Exception):
    """Propagation emptied the domain of `cell`."""

    def __init__(self, cell: tuple[int, int]):
        super().__init__(f"empty domain at {cell}")
        self.cell = cell


@dataclass
class WaveState:
    domains: np.ndarray
    rng_seed: int

    def copy(self) -> "WaveState":
        return WaveState(self.domains.copy(), self.rng_seed)


@dataclass(frozen=True, eq=False)
class AdjacencyRules:
    """Candidate weights and per-side support for one (tileset, preset)."""

    weights: np.ndarray
    support: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @classmethod
    def build(cls, tileset: TileSet, preset: Preset) -> "AdjacencyRules":
        """support[d][a, b] is True when candidate b may sit on side d of candidate a."""
        sockets = []
        weights = []
        for tile in tileset.tiles:
            for rotation in ROTATIONS:
                sockets.append(tile.rotated_sockets(rotation))
                weights.append(tile.weight(preset))
        labels = sorted({label for s in sockets for label in s} | set(tileset.compatibility))
        index = {label: i for i, label in enumerate(labels)}
        relation = np.zeros((len(labels), len(labels)), dtype=bool)
        for label, partners in tileset.compatibility.items():
            for other in partners:
                relation[index[label], index[other]] = True
        codes = np.array([[index[label] for label in s] for s in sockets])
        support = tuple(relation[codes[:, d][:, None], codes[:, (d + 2) % 4][None, :]] for d in range(4))
        return cls(weights=np.array(weights, dtype=float), support=support)  # type: ignore[arg-type]

    def initial_state(self, seed: int) -> WaveState:
        mask = self.weights > 0
        domains = np.broadcast_to(mask, (GRID_SIZE, GRID_SIZE, len(mask))).copy()
        return WaveState(domains, seed)


def propagate(state: WaveState, cell: tuple[int, int], rules: AdjacencyRules) -> WaveState:
    """
    Restore arc consistency after the domain of `cell` shrank.

    Args:
        state: Current wave state (not mutated)
        cell: Cell whose domain just changed
        rules: Adjacency rules of the running generation

    Returns:
        New WaveState at the propagation fixpoint

    Raises:
        DomainWipeout: If some neighbour domain becomes empty
    """
    result = state.copy()
    _propagate_in_place(result.domains, [cell], rules)
    return result


def _propagate_in_place(domains: np.ndarray, seeds: list[tuple[int, int]], rules: AdjacencyRules) -> None:
    queue = list(seeds)
    queued = set(queue)
    while queue:
        cell = queue.pop(0)
        queued.discard(cell)
        domain = domains[cell]
        for side, (di, dj) in enumerate(_OFFSETS):
            ni, nj = cell[0] + di, cell[1] + dj
            if not (0 <= ni < GRID_SIZE and 0 <= nj < GRID_SIZE):
                continue
            allowed = rules.support[side][domain].any(axis=0)
            before = domains[ni, nj]
            after = before & allowed
            if np.array_equal(after, before):
                continue
            domains[ni, nj] = after
            if not after.any():
                raise DomainWipeout((ni, nj))
            if (ni, nj) not in queued:
                queue.append((ni, nj))
                queued.add((ni, nj))


def _entropies(domains: np.ndarray, weights: np.ndarray) -> np.ndarray:
    w = domains * weights
    total = w.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        wlogw = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0).sum(axis=2)
        entropy = np.log(total) - wlogw / total
    return entropy


def _observe(state: WaveState, rules: AdjacencyRules, rng: XorShiftRandom) -> tuple[int, int] | None:
    counts = state.domains.sum(axis=2)
    open_cells = counts > 1
    if not open_cells.any():
        return None
    entropy = np.where(open_cells, _entropies(state.domains, rules.weights), np.inf)
    lowest = entropy.min()
    ties = [tuple(int(v) for v in c) for c in np.argwhere(open_cells & (entropy <= lowest + 1e-12))]
    cell = ties[rng.randbelow(len(ties))] if len(ties) > 1 else ties[0]

    candidates = np.flatnonzero(state.domains[cell])
    weights = rules.weights[candidates]
    threshold = rng.random() * weights.sum()
    pick = int(np.searchsorted(np.cumsum(weights), threshold, side="right"))
    chosen = candidates[min(pick, len(candidates) - 1)]
    state.domains[cell] = False
    state.domains[cell + (chosen,)] = True
    return cell


def _attempt(rules: AdjacencyRules, seed: int) -> list[list[PlacedTile]]:
    rng = XorShiftRandom(seed)
    state = rules.initial_state(seed)
    if not state.domains.any(axis=2).all():
        raise DomainWipeout((0, 0))
    _propagate_in_place(state.domains, [(i, j) for i in range(GRID_SIZE) for j in range(GRID_SIZE)], rules)
    while True:
        cell = _observe(state, rules, rng)
        if cell is None:
            break
        _propagate_in_place(state.domains, [cell], rules)

    grid = []
    for row in range(GRID_SIZE):
        placed_row = []
        for col in range(GRID_SIZE):
            candidate = int(np.flatnonzero(state.domains[row, col])[0])
            placed_row.append(PlacedTile(candidate // 4, ROTATIONS[candidate % 4], (row, col)))
        grid.append(placed_row)
    return grid


def generate(
    tileset: TileSet,
    preset: Preset,
    seed: int,
    max_restarts: int = MAX_RESTARTS,
) -> list[list[PlacedTile]]:
    """
    Generate a 7x7 tile arrangement.

    Args:
        tileset: Validated tile vocabulary
        preset: Weight preset, "A" or "B"
        seed: Seed of the first attempt; restart k uses seed + k
        max_restarts: Restarts allowed after the first attempt

    Returns:
        Row-major grid of PlacedTile

    Raises:
        WFCContradictionError: If every attempt hits an empty domain
    """
    if preset not in ("A", "B"):
        raise TileSetError(f"unknown preset '{preset}'")
    rules = AdjacencyRules.build(tileset, preset)
    last_cell = None
    for restart in range(max_restarts + 1):
        try:
            grid = _attempt(rules, seed + restart)
        except DomainWipeout as e:
            last_cell = e.cell
            logger.debug(f"Contradiction at {e.cell} with seed {seed + restart}")
            continue
        if restart:
            logger.info(f"Preset {preset} seed {seed} succeeded after {restart} restarts")
        return grid
    raise WFCContradictionError(
        f"tileset '{tileset.name}' preset {preset} is unsatisfiable for seeds "
        f"{seed}..{seed + max_restarts} (last contradiction at {last_cell})",
        first_seed=seed,
        last_seed=seed + max_restarts,
        cell=last_cell,
    )


def validate_grid(grid: list[list[PlacedTile]], tileset: TileSet) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Return every adjacent pair whose facing sockets are incompatible."""
    bad = []
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            here = grid[row][col]
            sockets = tileset.tiles[here.tile_id].rotated_sockets(here.rotation)
            for side, (di, dj) in ((1, (0, 1)), (2, (1, 0))):
                ni, nj = row + di, col + dj
                if ni >= GRID_SIZE or nj >= GRID_SIZE:
                    continue
                there = grid[ni][nj]
                facing = tileset.tiles[there.tile_id].rotated_sockets(there.rotation)[(side + 2) % 4]
                if not tileset.compatible(sockets[side], facing):
                    bad.append(((row, col), (ni, nj)))
    return bad


@lru_cache(maxsize=1)
def default_tileset() -> TileSet:
    """The shipped 35-tile set."""
    return load_tileset(DEFAULT_TILESET_PATH)

