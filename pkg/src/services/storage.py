"""
File storage for levels, traces, fitness reports and run summaries.

Layout of an evaluation run:
    <out>/<level>/level.yaml
    <out>/<level>/traces/<config>__spawn<k>.jsonl
    <out>/<level>/fitness.yaml
    <out>/summary.yaml
"""

import logging
from pathlib import Path
from typing import Any, Iterator

import yaml

from src.config.schema import LevelFile
from src.core.agent import TraceLog
from src.core.evaluation import FitnessReport
from src.core.tiles import TileSet, load_tileset
from src.core.wfcgen import default_tileset
from src.core.world import Level, PlacedTile, WorldObject, build_level

logger = logging.getLogger(__name__)

LEVEL_FILE = "level.yaml"
FITNESS_FILE = "fitness.yaml"
SUMMARY_FILE = "summary.yaml"
TRACES_DIR = "traces"
DEFAULT_TILESET_REF = "default"


def _dump_yaml(data: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, sort_keys=False)
    return path


def _load_yaml(path: Path, what: str) -> Any:
    if not path.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


# --- Levels ---

def resolve_tileset(ref: str | None, base_dir: Path | None = None) -> TileSet:
    """Map a tileset reference to a TileSet: 'default' or a file path."""
    if ref is None or ref == DEFAULT_TILESET_REF:
        return default_tileset()
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None and (base_dir / path).exists():
        path = base_dir / path
    return load_tileset(path)


def level_to_dict(level: Level) -> dict[str, Any]:
    data: dict[str, Any] = {"id": level.id, "tileset_ref": level.tileset_ref}
    if level.generator is not None:
        data["generator"] = {"preset": level.generator[0], "seed": level.generator[1]}
    data["tiles"] = [
        {"tile_id": t.tile_id, "rotation": t.rotation, "row": t.grid_pos[0], "col": t.grid_pos[1]}
        for row in level.tiles
        for t in row
    ]
    if level.objects_overridden:
        data["objects_override"] = [
            {
                "id": o.id,
                "kind": o.kind,
                "position": list(o.position),
                "size": list(o.size),
                "blocking": o.blocking,
            }
            for o in level.objects
        ]
    return data


def level_from_model(model: LevelFile, tileset: TileSet, walkable_rise: float = 5.0) -> Level:
    grid: list[list[PlacedTile | None]] = [[None] * 7 for _ in range(7)]
    for t in model.tiles:
        grid[t.row][t.col] = PlacedTile(t.tile_id, t.rotation, (t.row, t.col))
    overrides = None
    if model.objects_override is not None:
        overrides = [WorldObject(o.id, o.kind, o.position, o.size, o.blocking) for o in model.objects_override]
    generator = (model.generator.preset, model.generator.seed) if model.generator else None
    return build_level(
        grid,  # type: ignore[arg-type]
        tileset,
        level_id=model.id,
        tileset_ref=model.tileset_ref,
        objects_override=overrides,
        walkable_rise=walkable_rise,
        generator=generator,
    )


def save_level(level: Level, path: str | Path) -> Path:
    return _dump_yaml(level_to_dict(level), Path(path))


def load_level(path: str | Path, tileset: TileSet | None = None, walkable_rise: float = 5.0) -> Level:
    """
    Parse and build a level file.

    Args:
        path: Level YAML file
        tileset: Tileset to use instead of the file's tileset_ref
        walkable_rise: Maximum rise across one nav cell

    Returns:
        The constructed Level
    """
    path = Path(path)
    model = LevelFile(**(_load_yaml(path, "Level file") or {}))
    if tileset is None:
        tileset = resolve_tileset(model.tileset_ref, path.parent)
    return level_from_model(model, tileset, walkable_rise)


def find_level_files(paths: list[str | Path]) -> list[Path]:
    """Expand directories into the level files they contain, sorted by name."""
    found: list[Path] = []
    for entry in paths:
        entry = Path(entry)
        if entry.is_dir():
            found.extend(sorted(p for p in entry.glob("*.yaml") if p.name != SUMMARY_FILE))
            found.extend(sorted(p for p in entry.glob(f"*/{LEVEL_FILE}")))
        elif entry.exists():
            found.append(entry)
        else:
            raise FileNotFoundError(f"Level file not found: {entry}")
    return found


# --- Results ---

class ResultStore:
    """Reads and writes the artefacts of one evaluation run directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def level_dir(self, level_id: str) -> Path:
        return self.root / level_id

    def trace_path(self, level_id: str, config: str, spawn_index: int) -> Path:
        return self.level_dir(level_id) / TRACES_DIR / f"{config}__spawn{spawn_index}.jsonl"

    def write_level(self, level: Level) -> Path:
        return save_level(level, self.level_dir(level.id) / LEVEL_FILE)

    def write_trace(self, trace: TraceLog, level_id: str, config: str, spawn_index: int) -> Path:
        return trace.write(self.trace_path(level_id, config, spawn_index))

    def write_fitness(self, report: FitnessReport) -> Path:
        path = _dump_yaml(report.to_dict(), self.level_dir(report.level_id) / FITNESS_FILE)
        logger.info(f"Wrote fitness report for '{report.level_id}' (F = {report.F:.4f})")
        return path

    def write_summary(self, summary: dict[str, Any]) -> Path:
        return _dump_yaml(summary, self.root / SUMMARY_FILE)

    def read_summary(self) -> dict[str, Any]:
        return _load_yaml(self.root / SUMMARY_FILE, "Summary") or {}

    def read_fitness(self, level_id: str) -> dict[str, Any]:
        return _load_yaml(self.level_dir(level_id) / FITNESS_FILE, "Fitness report") or {}

    def level_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.parent.name for p in self.root.glob(f"*/{LEVEL_FILE}"))

    def load_level(self, level_id: str, walkable_rise: float = 5.0) -> Level:
        return load_level(self.level_dir(level_id) / LEVEL_FILE, walkable_rise=walkable_rise)

    def iter_traces(self, level_id: str) -> Iterator[tuple[str, int, Path]]:
        """Yield (config, spawn index, path) for each stored trace of a level."""
        for path in sorted((self.level_dir(level_id) / TRACES_DIR).glob("*.jsonl")):
            config, _, spawn = path.stem.rpartition("__spawn")
            if config and spawn.isdigit():
                yield config, int(spawn), path
