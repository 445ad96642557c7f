"""Experiment orchestrator: generate levels, run the agent battery, score and report."""

import asyncio
import logging
import math
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from scipy import ndimage

from src.config.schema import ExperimentConfig
from src.core.agent import AgentParams, TraceLog, run_episode, run_random_control
from src.core.errors import SpawnSelectionError
from src.core.evaluation import (
    RANDOM_CONFIG,
    EpisodeScores,
    FitnessReport,
    fitness,
    novelty_series,
    region_visit_counts,
    score_episode,
)
from src.core.tiles import Preset, TileSet
from src.core.wfcgen import generate
from src.core.world import Level, build_level
from src.metrics.scoring import MetricConfig
from src.services.storage import ResultStore, load_level, resolve_tileset
from src.utils.plots import plot_heatmap, plot_histogram, plot_preset_bars
from src.utils.rng import XorShiftRandom, derive_seed

logger = logging.getLogger(__name__)

SPAWN_ATTEMPTS = 10_000
UNKNOWN_PRESET = "custom"


@dataclass(frozen=True)
class EpisodeJob:
    level: Level
    config: str
    spawn_index: int
    spawn: tuple[float, float]
    seed: int
    params: AgentParams
    experiment: ExperimentConfig


@dataclass(frozen=True)
class EpisodeResult:
    level_id: str
    config: str
    spawn_index: int
    trace: TraceLog
    scores: EpisodeScores


def run_job(job: EpisodeJob) -> EpisodeResult:
    """Simulate and score one episode; runs inside worker processes."""
    if job.config == RANDOM_CONFIG:
        trace = run_random_control(job.level, job.spawn, job.params, job.seed)
    else:
        trace = run_episode(
            job.level, job.spawn, MetricConfig.from_token(job.config), job.params, job.seed, config_name=job.config
        )
    scores = score_episode(trace, job.level, job.experiment.evaluation, job.experiment.novelty)
    return EpisodeResult(job.level.id, job.config, job.spawn_index, trace, scores)


def level_preset(level: Level) -> str:
    return level.generator[0] if level.generator else UNKNOWN_PRESET


class ExperimentOrchestrator:
    """
    High-level orchestrator for level generation and evaluation batteries.

    Usage:
        orchestrator = ExperimentOrchestrator()
        orchestrator.load_config("experiments/default_battery.yaml")
        summary = orchestrator.run(["levels/"], "results/")
        orchestrator.write_report("results/", "reports/")
    """

    def __init__(self, config: ExperimentConfig | None = None):
        """
        Initialize the orchestrator.

        Args:
            config: Experiment configuration (defaults when omitted)
        """
        self.config = config or ExperimentConfig()
        self._tileset: TileSet | None = None

    def load_config(self, yaml_path: str | Path) -> "ExperimentOrchestrator":
        """
        Load an experiment configuration from a YAML file.

        Args:
            yaml_path: Path to the YAML configuration file

        Returns:
            Self for method chaining
        """
        yaml_path = Path(yaml_path)
        if not yaml_path.exists():
            raise FileNotFoundError(f"Experiment configuration not found: {yaml_path}")
        with open(yaml_path, "r", encoding="utf-8") as f:
            raw_config = yaml.safe_load(f) or {}
        self.config = ExperimentConfig(**raw_config)
        self._tileset = None
        return self

    @property
    def tileset(self) -> TileSet:
        if self._tileset is None:
            self._tileset = resolve_tileset(self.config.tileset)
        return self._tileset

    @property
    def tileset_ref(self) -> str:
        return self.config.tileset or "default"

    # --- Generation ---

    def generate_level(self, preset: Preset, seed: int) -> Level:
        grid = generate(self.tileset, preset, seed)
        return build_level(
            grid,
            self.tileset,
            level_id=f"level_{preset}_{seed}",
            tileset_ref=self.tileset_ref,
            walkable_rise=self.config.world.walkable_rise,
            generator=(preset, seed),
        )

    def generate_levels(self, preset: Preset, count: int, seed: int) -> list[Level]:
        """Levels from seeds seed, seed + 1, ... seed + count - 1."""
        levels = [self.generate_level(preset, seed + i) for i in range(count)]
        logger.info(f"Generated {count} preset {preset} levels from seed {seed}")
        return levels

    # --- Planning ---

    def select_spawns(self, level: Level) -> list[tuple[float, float]]:
        """
        Seeded rejection sampling of spawn points.

        Candidates are cell centres of the largest walkable component; accepted
        spawns are pairwise at least `spawn_min_separation` apart.

        Raises:
            SpawnSelectionError: If no such set is found
        """
        count = self.config.spawns_per_level
        separation = self.config.spawn_min_separation
        labels, components = ndimage.label(level.nav_grid.cells)
        if components == 0:
            raise SpawnSelectionError(f"level '{level.id}' has no walkable cells")
        sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, components + 1))
        largest = int(np.argmax(sizes)) + 1
        cells = [tuple(int(v) for v in c) for c in np.argwhere(labels == largest)]

        rng = XorShiftRandom(derive_seed(self.config.master_seed, level.id, "spawns"))
        spawns: list[tuple[float, float]] = []
        for _ in range(SPAWN_ATTEMPTS):
            x, z = level.nav_grid.center_of(rng.choice(cells))
            if all(math.hypot(x - sx, z - sz) >= separation for sx, sz in spawns):
                spawns.append((float(x), float(z)))
                if len(spawns) == count:
                    return spawns
        raise SpawnSelectionError(
            f"could not place {count} spawns {separation} units apart in level '{level.id}'"
        )

    def plan(self, levels: list[Level], params: AgentParams) -> list[EpisodeJob]:
        for config in self.config.configs:
            if config != RANDOM_CONFIG:
                MetricConfig.from_token(config)
        jobs = []
        for level in levels:
            for spawn_index, spawn in enumerate(self.select_spawns(level)):
                for config in self.config.configs:
                    seed = derive_seed(self.config.master_seed, level.id, config, spawn_index)
                    jobs.append(EpisodeJob(level, config, spawn_index, spawn, seed, params, self.config))
        return jobs

    # --- Evaluation ---

    def _executor(self) -> Executor | None:
        workers = self.config.workers or os.cpu_count() or 1
        return None if workers == 1 else ProcessPoolExecutor(max_workers=workers)

    async def run_async(self, level_paths: list[str | Path] | list[Level], out_dir: str | Path) -> dict[str, Any]:
        """
        Run every configured episode on every level and write all results.

        Args:
            level_paths: Level files, or already built levels
            out_dir: Run directory

        Returns:
            The summary written to <out_dir>/summary.yaml
        """
        levels = [
            lv if isinstance(lv, Level) else load_level(lv, walkable_rise=self.config.world.walkable_rise)
            for lv in level_paths
        ]
        params = AgentParams.from_config(self.config)
        jobs = self.plan(levels, params)
        logger.info(f"Running {len(jobs)} episodes over {len(levels)} levels")

        executor = self._executor()
        if executor is None:
            outcomes: list[EpisodeResult | BaseException] = []
            for job in jobs:
                try:
                    outcomes.append(run_job(job))
                except Exception as e:
                    outcomes.append(e)
        else:
            loop = asyncio.get_running_loop()
            with executor:
                futures = [loop.run_in_executor(executor, run_job, job) for job in jobs]
                outcomes = await asyncio.gather(*futures, return_exceptions=True)

        store = ResultStore(out_dir)
        by_level: dict[str, list[tuple[EpisodeJob, EpisodeResult | BaseException]]] = {}
        for job, outcome in zip(jobs, outcomes):
            by_level.setdefault(job.level.id, []).append((job, outcome))

        reports = []
        for level in levels:
            store.write_level(level)
            reports.append(self._finish_level(store, level, by_level.get(level.id, [])))

        summary = self.summarize(levels, reports)
        store.write_summary(summary)
        logger.info(f"Evaluation finished; summary written to {store.root}")
        return summary

    def _finish_level(
        self,
        store: ResultStore,
        level: Level,
        outcomes: list[tuple[EpisodeJob, EpisodeResult | BaseException]],
    ) -> FitnessReport:
        results: dict[str, list[EpisodeScores]] = {}
        failure: str | None = None
        for job, outcome in outcomes:
            if isinstance(outcome, BaseException):
                failure = failure or f"{job.config} spawn {job.spawn_index}: {outcome}"
                logger.error(f"Episode {level.id}/{job.config}/spawn{job.spawn_index} failed: {outcome}")
                continue
            store.write_trace(outcome.trace, level.id, job.config, job.spawn_index)
            results.setdefault(job.config, []).append(outcome.scores)

        if failure is None:
            try:
                report = fitness(results, self.config.fitness, level_id=level.id)
            except ValueError as e:
                failure = str(e)
        if failure is not None:
            logger.warning(f"Level '{level.id}' report is partial: {failure}")
            report = FitnessReport(
                level_id=level.id,
                rows=(),
                F=0.0,
                weights=dict(self.config.fitness.weights),
                partial=True,
                error=failure,
            )
        store.write_fitness(report)
        return report

    def summarize(self, levels: list[Level], reports: list[FitnessReport]) -> dict[str, Any]:
        rows = []
        per_preset: dict[str, list[float]] = {}
        for level, report in zip(levels, reports):
            preset = level_preset(level)
            rows.append({"id": level.id, "preset": preset, "F": None if report.partial else report.F, "partial": report.partial})
            if not report.partial:
                per_preset.setdefault(preset, []).append(report.F)
        return {
            "experiment": self.config.name,
            "master_seed": self.config.master_seed,
            "levels": rows,
            "presets": {
                preset: {"levels": len(values), "mean_F": float(np.mean(values))}
                for preset, values in sorted(per_preset.items())
            },
        }

    def run(self, level_paths: list[str | Path] | list[Level], out_dir: str | Path) -> dict[str, Any]:
        """Synchronous wrapper around run_async."""
        return asyncio.run(self.run_async(level_paths, out_dir))

    # --- Reports ---

    def write_report(self, in_dir: str | Path, out_dir: str | Path) -> list[Path]:
        """
        Render SVG charts from the traces of an evaluation run.

        Every number is recomputed from the stored traces and level files.

        Args:
            in_dir: Run directory written by run()
            out_dir: Directory for the SVG files

        Returns:
            Paths of the written files

        Raises:
            FileNotFoundError: If in_dir holds no evaluated levels
        """
        store = ResultStore(in_dir)
        level_ids = store.level_ids()
        if not level_ids:
            raise FileNotFoundError(f"No evaluation results under {in_dir}")
        out_dir = Path(out_dir)
        written: list[Path] = []

        motivation: dict[str, dict[str, list[float]]] = {}
        novelty: dict[str, dict[str, list[float]]] = {}
        averages: dict[str, dict[str, dict[str, list[float]]]] = {"coverage": {}, "entropy": {}, "inspection": {}}

        for level_id in level_ids:
            level = store.load_level(level_id, walkable_rise=self.config.world.walkable_rise)
            preset = level_preset(level)
            for config, spawn_index, path in store.iter_traces(level_id):
                trace = TraceLog.read(path)
                if trace.has_motivation():
                    motivation.setdefault(config, {}).setdefault(preset, []).extend(trace.motivation_samples())
                novelty.setdefault(config, {}).setdefault(preset, []).extend(
                    novelty_series(trace, self.config.novelty).tolist()
                )
                scores = score_episode(trace, level, self.config.evaluation, self.config.novelty)
                for measure in averages:
                    averages[measure].setdefault(config, {}).setdefault(preset, []).append(getattr(scores, measure))
                written.append(
                    plot_heatmap(
                        region_visit_counts(trace, self.config.evaluation.region_size),
                        f"{level_id} / {config} / spawn {spawn_index}",
                        out_dir / f"heatmap_{level_id}_{config}_spawn{spawn_index}.svg",
                    )
                )

        for config, series in motivation.items():
            written.append(
                plot_histogram(series, f"Motivation: {config}", "motivation", out_dir / f"motivation_{config}.svg")
            )
        for config, series in novelty.items():
            written.append(
                plot_histogram(series, f"Novelty: {config}", "novelty per tick", out_dir / f"novelty_{config}.svg")
            )
        for measure, per_config in averages.items():
            means = {
                config: {preset: float(np.mean(values)) for preset, values in presets.items()}
                for config, presets in per_config.items()
            }
            written.append(
                plot_preset_bars(means, f"Average {measure}", measure, out_dir / f"averages_{measure}.svg")
            )
        logger.info(f"Wrote {len(written)} report files to {out_dir}")
        return written
