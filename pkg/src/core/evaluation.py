"""
Trajectory evaluation and level fitness.

Every score here is a pure function of a TraceLog (plus the Level for
inspection), so stored logs can be re-scored at any time.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from src.config.schema import EvaluationConfig, FitnessConfig, NoveltyConfig
from src.core.agent import TraceLog
from src.core.errors import FitnessInputError, MotivationUnavailableError
from src.core.world import GRID_SIZE, Level

logger = logging.getLogger(__name__)

RANDOM_CONFIG = "random"


# --- Regions ---

def region_visit_counts(trace: TraceLog, region_size: float = 50.0, grid: int = GRID_SIZE) -> np.ndarray:
    """Tick counts per (row, col) region; row follows z, col follows x."""
    counts = np.zeros((grid, grid), dtype=int)
    positions = trace.positions()
    if len(positions) == 0:
        return counts
    cols = np.clip((positions[:, 0] // region_size).astype(int), 0, grid - 1)
    rows = np.clip((positions[:, 1] // region_size).astype(int), 0, grid - 1)
    np.add.at(counts, (rows, cols), 1)
    return counts


def coverage(trace: TraceLog, config: EvaluationConfig | None = None) -> float:
    """Fraction of the level's regions holding at least one tick position."""
    config = config or EvaluationConfig()
    counts = region_visit_counts(trace, config.region_size)
    return float(np.count_nonzero(counts)) / counts.size


def inspection(trace: TraceLog, level: Level, config: EvaluationConfig | None = None) -> float:
    """
    Fraction of objects the agent came within the inspection radius of.

    Distance is measured horizontally to the object's footprint.
    """
    config = config or EvaluationConfig()
    if not level.objects:
        logger.warning(f"Level '{level.id}' has no objects; inspection is 0")
        return 0.0
    positions = trace.positions()
    if len(positions) == 0:
        return 0.0
    xs, zs = positions[:, 0], positions[:, 1]
    radius = config.inspection_radius + 1e-9
    inspected = sum(1 for obj in level.objects if obj.footprint_distance(xs, zs).min() <= radius)
    return inspected / len(level.objects)


def entropy(trace: TraceLog, config: EvaluationConfig | None = None) -> float:
    """Shannon entropy of region visits in bits, normalised by log2 of the region count."""
    config = config or EvaluationConfig()
    counts = region_visit_counts(trace, config.region_size).ravel()
    if counts.sum() == 0 or np.count_nonzero(counts) <= 1:
        return 0.0
    bits = float(stats.entropy(counts / counts.sum(), base=2))
    return min(max(bits / math.log2(config.entropy_regions), 0.0), 1.0)


# --- Novelty ---

@dataclass(frozen=True)
class NoveltyState:
    """Per-kind novelty N; a kind enters the map on its first sighting."""

    scores: Mapping[str, float] = field(default_factory=dict)


def novelty_tick(
    state: NoveltyState,
    visible_kinds: Iterable[str],
    constants: NoveltyConfig | None = None,
) -> tuple[NoveltyState, float]:
    """
    Advance the novelty recurrence by one tick.

    Visible kinds contribute their pre-update N. A first sighting starts at
    N = M and pays the penalty P; a kind seen before recovers by r * dt whether
    visible or not. N is clamped to [0, M].

    Args:
        state: Novelty before this tick
        visible_kinds: Kinds of the objects visible this tick
        constants: r, M, P and dt

    Returns:
        (new state, this tick's novelty sum)
    """
    c = constants or NoveltyConfig()
    visible = set(visible_kinds)
    recovery = c.recovery_rate * c.tick
    scores = dict(state.scores)
    total = 0.0

    for kind in sorted(visible):
        if kind not in scores:
            total += c.max_score
            scores[kind] = c.max_score - c.penalty
        else:
            total += scores[kind]
            scores[kind] = scores[kind] + recovery
    for kind in scores:
        if kind not in visible:
            scores[kind] = scores[kind] + recovery
    for kind, value in scores.items():
        scores[kind] = min(max(value, 0.0), c.max_score)
    return NoveltyState(scores), total


def novelty_series(trace: TraceLog, constants: NoveltyConfig | None = None) -> np.ndarray:
    """Per-tick novelty sums over an episode."""
    kinds = trace.object_kinds
    state = NoveltyState()
    series = np.zeros(len(trace.ticks))
    for index, tick in enumerate(trace.ticks):
        state, series[index] = novelty_tick(state, (kinds[i] for i in tick.visible if i in kinds), constants)
    return series


def novelty_avg(trace: TraceLog, constants: NoveltyConfig | None = None) -> float:
    series = novelty_series(trace, constants)
    if len(series) == 0:
        return 0.0
    return min(max(float(series.mean()), 0.0), 1.0)


def motivation_avg(trace: TraceLog) -> float:
    """Mean of the scheduled decision scores."""
    samples = trace.motivation_samples()
    if not samples:
        raise MotivationUnavailableError(f"trace for config '{trace.config}' carries no motivation samples")
    return float(np.mean(samples))


# --- Episode and level scores ---

@dataclass(frozen=True)
class EpisodeScores:
    coverage: float
    inspection: float
    entropy: float
    novelty_avg: float
    motivation_avg: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "coverage": self.coverage,
            "inspection": self.inspection,
            "entropy": self.entropy,
            "novelty_avg": self.novelty_avg,
            "motivation_avg": self.motivation_avg,
        }


def score_episode(
    trace: TraceLog,
    level: Level,
    evaluation: EvaluationConfig | None = None,
    novelty: NoveltyConfig | None = None,
) -> EpisodeScores:
    """Every per-episode measure of one trace."""
    return EpisodeScores(
        coverage=coverage(trace, evaluation),
        inspection=inspection(trace, level, evaluation),
        entropy=entropy(trace, evaluation),
        novelty_avg=novelty_avg(trace, novelty),
        motivation_avg=motivation_avg(trace) if trace.has_motivation() else None,
    )


@dataclass(frozen=True)
class ConfigResult:
    """Spawn-averaged scores of one metric configuration and its fitness term."""

    config: str
    spawns: int
    coverage: float
    entropy: float
    inspection: float
    novelty_avg: float
    motivation_avg: float | None
    gates: dict[str, bool]
    f: float | None
    weight: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "spawns": self.spawns,
            "coverage": self.coverage,
            "entropy": self.entropy,
            "inspection": self.inspection,
            "M_avg": self.motivation_avg,
            "N_avg": self.novelty_avg,
            "gates": dict(self.gates),
            "f": self.f,
            "weight": self.weight,
        }


@dataclass(frozen=True)
class FitnessReport:
    level_id: str
    rows: tuple[ConfigResult, ...]
    F: float
    weights: dict[str, float]
    random_control: ConfigResult | None = None
    partial: bool = False
    error: str | None = None

    def row(self, config: str) -> ConfigResult | None:
        return next((r for r in self.rows if r.config == config), None)

    def to_dict(self) -> dict[str, Any]:
        return {
            "level_id": self.level_id,
            "F": self.F,
            "partial": self.partial,
            "error": self.error,
            "weights": dict(self.weights),
            "configs": [r.to_dict() for r in self.rows],
            "random_control": self.random_control.to_dict() if self.random_control else None,
        }


def _gates(avg_coverage: float, avg_entropy: float, avg_inspection: float, config: FitnessConfig) -> dict[str, bool]:
    cov_lo, cov_hi = config.coverage_range
    insp_lo, insp_hi = config.inspection_range
    return {
        "coverage": cov_lo <= avg_coverage <= cov_hi,
        "entropy": avg_entropy <= config.entropy_max,
        "inspection": insp_lo < avg_inspection <= insp_hi,
    }


def _aggregate(name: str, episodes: Sequence[EpisodeScores], config: FitnessConfig, weight: float) -> ConfigResult:
    avg_coverage = float(np.mean([e.coverage for e in episodes]))
    avg_entropy = float(np.mean([e.entropy for e in episodes]))
    avg_inspection = float(np.mean([e.inspection for e in episodes]))
    avg_novelty = float(np.mean([e.novelty_avg for e in episodes]))
    motivations = [e.motivation_avg for e in episodes if e.motivation_avg is not None]
    avg_motivation = float(np.mean(motivations)) if motivations else None
    gates = _gates(avg_coverage, avg_entropy, avg_inspection, config)

    if name == RANDOM_CONFIG:
        f = None
    elif avg_motivation is None:
        raise MotivationUnavailableError(f"config '{name}' has no motivation samples")
    else:
        f = avg_motivation * avg_novelty if all(gates.values()) else 0.0
    return ConfigResult(
        config=name,
        spawns=len(episodes),
        coverage=avg_coverage,
        entropy=avg_entropy,
        inspection=avg_inspection,
        novelty_avg=avg_novelty,
        motivation_avg=avg_motivation,
        gates=gates,
        f=f,
        weight=weight,
    )


def fitness(
    level_results: Mapping[str, Sequence[EpisodeScores]],
    config: FitnessConfig | None = None,
    level_id: str = "",
) -> FitnessReport:
    """
    Gated, weighted fitness over the metric configurations of one level.

    Args:
        level_results: Config name -> per-spawn EpisodeScores; 'random' is
            reported but carries no weight
        config: Gates and weights
        level_id: Level the results belong to

    Returns:
        FitnessReport with F = sum of weight * f over the weighted configs

    Raises:
        FitnessInputError: If a weighted config has no results
    """
    config = config or FitnessConfig()
    missing = [name for name in config.weights if not level_results.get(name)]
    if missing:
        raise FitnessInputError(f"missing results for configs: {', '.join(missing)}", missing)

    rows = tuple(
        _aggregate(name, level_results[name], config, weight) for name, weight in config.weights.items()
    )
    random_row = None
    if level_results.get(RANDOM_CONFIG):
        random_row = _aggregate(RANDOM_CONFIG, level_results[RANDOM_CONFIG], config, 0.0)

    total = math.fsum(row.weight * (row.f or 0.0) for row in rows)
    return FitnessReport(
        level_id=level_id,
        rows=rows,
        F=min(max(total, 0.0), 1.0),
        weights=dict(config.weights),
        random_control=random_row,
    )
