"""Pydantic models for validating YAML experiment, tileset and level files."""

from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator


# --- Experiment configuration ---

class ViewConfig(BaseModel):
    """Camera parameters shared by perception and the metrics."""

    length_of_view: float = Field(115.0, gt=0, description="Maximum observation distance in units")
    field_of_view: float = Field(90.0, gt=0, le=360, description="Camera cone angle in degrees")


class AgentConfig(BaseModel):
    """Exploratory agent parameters."""

    decision_time: float = Field(1.0, gt=0, description="Seconds between scheduled decisions")
    move_distance: float = Field(50.0, gt=0, description="Commitment distance of a directional move")
    speed: float = Field(10.0, gt=0, description="Movement speed in units per second")
    tick: float = Field(0.1, gt=0, description="Simulation time step in seconds")
    eye_height: float = Field(2.0, ge=0, description="Camera height above the ground")
    approach_distance: float = Field(10.0, ge=0, description="Stop this far short of a target object centre")

    @model_validator(mode="after")
    def _decision_is_whole_ticks(self) -> "AgentConfig":
        ratio = self.decision_time / self.tick
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("decision_time must be a positive multiple of tick")
        return self


class NoveltyConfig(BaseModel):
    """Constants of the per-kind novelty recurrence."""

    recovery_rate: float = Field(0.03, ge=0, description="Recovery rate r per second")
    max_score: float = Field(0.1, gt=0, description="Ceiling M of a kind's novelty")
    penalty: float = Field(0.1, ge=0, description="Penalty P applied on first sighting")
    tick: float = Field(0.1, gt=0, description="Recurrence interval in seconds")


class EvaluationConfig(BaseModel):
    """Trajectory evaluation knobs."""

    region_size: float = Field(50.0, gt=0, description="Side of a coverage region in units")
    inspection_radius: float = Field(10.0, ge=0, description="Approach distance that counts as inspection")
    entropy_regions: int = Field(49, ge=2, description="Region count used to normalise entropy")
    group_radius: float = Field(40.0, gt=0, description="Neighbour radius for group detection")


class FitnessConfig(BaseModel):
    """Gates and weights of the level fitness function."""

    coverage_range: tuple[float, float] = Field((0.20, 0.80), description="Inclusive coverage gate")
    entropy_max: float = Field(0.9, description="Inclusive upper bound on average entropy")
    inspection_range: tuple[float, float] = Field(
        (0.10, 0.80), description="Inspection gate: exclusive lower, inclusive upper"
    )
    weights: dict[str, float] = Field(
        default_factory=lambda: {
            "elevation": 0.1,
            "openness": 0.1,
            "anticipation": 0.1,
            "large-object": 0.1,
            "group": 0.1,
            "all": 0.5,
        },
        description="Weight per metric configuration",
    )

    @field_validator("weights")
    @classmethod
    def _weights_sum_to_one(cls, value: dict[str, float]) -> dict[str, float]:
        if any(w < 0 for w in value.values()):
            raise ValueError("fitness weights must be non-negative")
        if abs(sum(value.values()) - 1.0) > 1e-9:
            raise ValueError(f"fitness weights must sum to 1, got {sum(value.values())}")
        return value


class WorldConfig(BaseModel):
    """Level construction constants."""

    walkable_rise: float = Field(5.0, gt=0, description="Maximum rise across one nav cell")


class ExperimentConfig(BaseModel):
    """Root configuration model for an evaluation battery."""

    name: str = Field("experiment", description="Name of the experiment")
    description: str | None = Field(None, description="Experiment description")
    master_seed: int = Field(1, description="Seed every episode seed is derived from")
    duration: float = Field(180.0, gt=0, description="Simulated seconds per episode")
    spawns_per_level: int = Field(3, ge=1, description="Spawn points per level")
    spawn_min_separation: float = Field(100.0, ge=0, description="Minimum distance between spawns")
    workers: int | None = Field(None, ge=1, description="Process pool size (None = CPU count)")
    configs: list[str] = Field(
        default_factory=lambda: [
            "elevation", "openness", "anticipation", "large-object", "group", "all", "random",
        ],
        description="Metric configurations to run; 'random' is the control agent",
    )
    tileset: str | None = Field(None, description="Tileset file (None = shipped default)")
    view: ViewConfig = Field(default_factory=ViewConfig)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    novelty: NoveltyConfig = Field(default_factory=NoveltyConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    fitness: FitnessConfig = Field(default_factory=FitnessConfig)
    world: WorldConfig = Field(default_factory=WorldConfig)


# --- Tileset file ---

class DecorationModel(BaseModel):
    """An object placed on a tile."""

    kind: str = Field(..., description="Object type tag")
    anchor: tuple[float, float] = Field(..., description="Tile-local (u, v) position")
    size: tuple[float, float, float] = Field(..., description="Extents (sx, sy, sz)")
    blocking: bool = Field(True, description="Whether the object occludes rays and blocks navigation")

    @field_validator("anchor")
    @classmethod
    def _anchor_inside_tile(cls, value: tuple[float, float]) -> tuple[float, float]:
        if not all(0.0 < c < 50.0 for c in value):
            raise ValueError(f"decoration anchor {value} must lie strictly inside the tile")
        return value

    @field_validator("size")
    @classmethod
    def _size_positive(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        if not all(c > 0 for c in value):
            raise ValueError(f"decoration size {value} must be positive")
        return value


class ElevationModel(BaseModel):
    """Corner heights plus an interior height function."""

    corners: tuple[float, float, float, float] = Field(
        (0.0, 0.0, 0.0, 0.0), description="Heights at the nw, ne, se, sw corners"
    )
    interior: Literal["flat", "slope", "plateau"] = Field("flat", description="Interior height function")
    plateau_height: float = Field(0.0, ge=0, description="Raise of the plateau block")

    @model_validator(mode="after")
    def _flat_is_level(self) -> "ElevationModel":
        if self.interior == "flat" and len(set(self.corners)) != 1:
            raise ValueError("flat tiles need equal corner heights")
        return self


class TileDefModel(BaseModel):
    """One tile of the vocabulary."""

    id: int = Field(..., ge=0, description="Tile index")
    name: str = Field(..., description="Human-readable tile name")
    category: Literal["empty", "decorated", "elevation", "connector"] = Field("empty")
    sockets: tuple[str, str, str, str] = Field(..., description="Edge labels N, E, S, W")
    elevation: ElevationModel = Field(default_factory=ElevationModel)
    decorations: list[DecorationModel] = Field(default_factory=list)


class TileSetFile(BaseModel):
    """Root model of a tileset file."""

    name: str = Field("tileset", description="Tileset name")
    description: str | None = Field(None, description="Tileset description")
    sockets: dict[str, list[str]] = Field(..., description="Socket label -> compatible labels")
    tiles: list[TileDefModel] = Field(..., description="Tile definitions")
    presets: dict[Literal["A", "B"], list[float]] = Field(..., description="Per-preset tile weights")

    @model_validator(mode="after")
    def _presets_cover_tiles(self) -> "TileSetFile":
        for preset, weights in self.presets.items():
            if len(weights) != len(self.tiles):
                raise ValueError(f"preset {preset} has {len(weights)} weights for {len(self.tiles)} tiles")
        return self


# --- Level file ---

class PlacedTileModel(BaseModel):
    tile_id: int = Field(..., ge=0)
    rotation: Literal[0, 90, 180, 270] = Field(0)
    row: int = Field(..., ge=0, le=6)
    col: int = Field(..., ge=0, le=6)


class ObjectModel(BaseModel):
    id: str
    kind: str
    position: tuple[float, float, float]
    size: tuple[float, float, float]
    blocking: bool = True


class GeneratorInfo(BaseModel):
    preset: Literal["A", "B"]
    seed: int


class LevelFile(BaseModel):
    """Root model of a level file."""

    id: str = Field(..., description="Level identifier")
    tileset_ref: str = Field("default", description="Tileset the tile ids refer to")
    generator: GeneratorInfo | None = Field(None, description="Provenance of generated levels")
    tiles: list[PlacedTileModel] = Field(..., description="49 placed tiles")
    objects_override: list[ObjectModel] | None = Field(None, description="Replaces derived objects")

    @model_validator(mode="after")
    def _full_grid(self) -> "LevelFile":
        cells = {(t.row, t.col) for t in self.tiles}
        if len(self.tiles) != 49 or len(cells) != 49:
            raise ValueError("a level needs exactly one tile per cell of the 7x7 grid")
        return self
