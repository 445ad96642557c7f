"""Tile vocabulary shared by the level builder and the WFC generator."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Mapping

import numpy as np
import yaml

from src.config.schema import TileSetFile
from src.core.errors import TileSetError

TILE_SIZE = 50.0
SAMPLES_PER_TILE = 11
TILES_PER_SET = 35
SIDES = ("N", "E", "S", "W")
ROTATIONS = (0, 90, 180, 270)

Preset = Literal["A", "B"]


@dataclass(frozen=True)
class Decoration:
    kind: str
    anchor: tuple[float, float]
    size: tuple[float, float, float]
    blocking: bool = True


@dataclass(frozen=True)
class ElevationProfile:
    """Corner heights (nw, ne, se, sw) plus an interior height function."""

    corners: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    interior: Literal["flat", "slope", "plateau"] = "flat"
    plateau_height: float = 0.0

    def local_heights(self) -> np.ndarray:
        """Heights on the tile's 11x11 lattice, indexed [v, u] (row = south-ward)."""
        nw, ne, se, sw = self.corners
        s = np.linspace(0.0, 1.0, SAMPLES_PER_TILE)[None, :]
        t = np.linspace(0.0, 1.0, SAMPLES_PER_TILE)[:, None]
        heights = nw * (1 - s) * (1 - t) + ne * s * (1 - t) + se * s * t + sw * (1 - s) * t
        if self.interior == "plateau" and self.plateau_height > 0:
            raise_map = np.zeros((SAMPLES_PER_TILE, SAMPLES_PER_TILE))
            raise_map[1:-1, 1:-1] = 0.5
            raise_map[2:-2, 2:-2] = 1.0
            heights = heights + raise_map * self.plateau_height
        return heights

    def edge_heights(self, side: str) -> tuple[float, float]:
        """Start and end height of an edge, traversed clockwise."""
        nw, ne, se, sw = self.corners
        return {"N": (nw, ne), "E": (ne, se), "S": (se, sw), "W": (sw, nw)}[side]

    @property
    def is_elevated(self) -> bool:
        return self.interior != "flat" or any(c != 0 for c in self.corners)


@dataclass(frozen=True)
class TileDef:
    id: int
    name: str
    sockets: tuple[str, str, str, str]
    weight_a: float
    weight_b: float
    elevation: ElevationProfile = field(default_factory=ElevationProfile)
    decorations: tuple[Decoration, ...] = ()
    category: str = "empty"

    def weight(self, preset: Preset) -> float:
        return self.weight_a if preset == "A" else self.weight_b

    def rotated_sockets(self, rotation: int) -> tuple[str, str, str, str]:
        """Socket labels after turning the tile clockwise by `rotation` degrees."""
        k = (rotation // 90) % 4
        rotated = [""] * 4
        for i, label in enumerate(self.sockets):
            rotated[(i + k) % 4] = label
        return tuple(rotated)  # type: ignore[return-value]

    def rotated_heights(self, rotation: int) -> np.ndarray:
        return np.rot90(self.elevation.local_heights(), k=-((rotation // 90) % 4))


@dataclass(frozen=True)
class TileSet:
    tiles: tuple[TileDef, ...]
    compatibility: Mapping[str, frozenset[str]]
    name: str = "tileset"

    def __len__(self) -> int:
        return len(self.tiles)

    def compatible(self, a: str, b: str) -> bool:
        return b in self.compatibility.get(a, frozenset())

    def validate(self, expected_size: int = TILES_PER_SET) -> None:
        """Raise TileSetError unless every TileSet invariant holds."""
        if len(self.tiles) != expected_size:
            raise TileSetError(f"tileset '{self.name}' has {len(self.tiles)} tiles, expected {expected_size}")
        for index, tile in enumerate(self.tiles):
            if tile.id != index:
                raise TileSetError(f"tile at position {index} carries id {tile.id}")
            if tile.weight_a < 0 or tile.weight_b < 0:
                raise TileSetError(f"tile {tile.id} has a negative weight")
            for label in tile.sockets:
                if label not in self.compatibility:
                    raise TileSetError(f"tile {tile.id} uses undeclared socket '{label}'")
        for preset in ("A", "B"):
            if not any(t.weight(preset) > 0 for t in self.tiles):
                raise TileSetError(f"preset {preset} gives every tile zero weight")
        for label, partners in self.compatibility.items():
            for other in partners:
                if other not in self.compatibility or label not in self.compatibility[other]:
                    raise TileSetError(f"socket compatibility {label} -> {other} is not symmetric")


def tileset_from_model(model: TileSetFile) -> TileSet:
    """Convert a validated tileset file into the runtime TileSet."""
    tiles = []
    for index, tile in enumerate(model.tiles):
        tiles.append(
            TileDef(
                id=tile.id,
                name=tile.name,
                sockets=tuple(tile.sockets),  # type: ignore[arg-type]
                weight_a=model.presets["A"][index],
                weight_b=model.presets["B"][index],
                elevation=ElevationProfile(
                    corners=tuple(tile.elevation.corners),  # type: ignore[arg-type]
                    interior=tile.elevation.interior,
                    plateau_height=tile.elevation.plateau_height,
                ),
                decorations=tuple(
                    Decoration(d.kind, tuple(d.anchor), tuple(d.size), d.blocking)  # type: ignore[arg-type]
                    for d in tile.decorations
                ),
                category=tile.category,
            )
        )
    compatibility = {label: frozenset(partners) for label, partners in model.sockets.items()}
    return TileSet(tiles=tuple(tiles), compatibility=compatibility, name=model.name)


def load_tileset(path: str | Path, expected_size: int | None = TILES_PER_SET) -> TileSet:
    """
    Load and validate a tileset YAML file.

    Args:
        path: Path to the tileset file
        expected_size: Required tile count (None accepts any size)

    Returns:
        The validated TileSet

    Raises:
        FileNotFoundError: If the file does not exist
        TileSetError: If the tileset breaks its invariants
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Tileset file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    tileset = tileset_from_model(TileSetFile(**raw))
    tileset.validate(expected_size=len(tileset) if expected_size is None else expected_size)
    return tileset
