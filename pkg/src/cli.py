"""
CLI entry point for the exploratory level evaluation toolkit.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from src.config.schema import ExperimentConfig
from src.core.errors import SpawnSelectionError, WFCContradictionError
from src.core.tiles import load_tileset
from src.orchestrator import ExperimentOrchestrator
from src.services.storage import find_level_files, load_level, resolve_tileset, save_level

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SIMULATION = 1
EXIT_USAGE = 2


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _orchestrator(args: argparse.Namespace, **overrides: Any) -> ExperimentOrchestrator:
    """Load the experiment config and apply command-line overrides."""
    orchestrator = ExperimentOrchestrator()
    if args.config:
        orchestrator.load_config(args.config)
    updates = {key: value for key, value in overrides.items() if value is not None}
    if getattr(args, "tileset", None):
        updates["tileset"] = args.tileset
    if updates:
        orchestrator = ExperimentOrchestrator(ExperimentConfig(**{**orchestrator.config.model_dump(), **updates}))
    return orchestrator


# --- Subcommands ---

def cmd_generate(args: argparse.Namespace) -> int:
    orchestrator = _orchestrator(args)
    out_dir = Path(args.out)
    levels = orchestrator.generate_levels(args.preset, args.count, args.seed)
    for level in levels:
        path = save_level(level, out_dir / f"{level.id}.yaml")
        print(f"{level.id}: {len(level.objects)} objects -> {path}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    orchestrator = _orchestrator(
        args,
        duration=args.duration,
        spawns_per_level=args.spawns,
        workers=args.workers,
        master_seed=args.seed,
    )
    level_paths = find_level_files(args.levels)
    if not level_paths:
        print(f"Error: no level files found in {', '.join(args.levels)}", file=sys.stderr)
        return EXIT_USAGE

    summary = orchestrator.run(level_paths, args.out)

    print(f"\n{'='*60}")
    print(f"Experiment: {summary['experiment']} (master seed {summary['master_seed']})")
    print(f"{'='*60}")
    for row in summary["levels"]:
        score = "partial" if row["partial"] else f"{row['F']:.4f}"
        print(f"  {row['id']:<24} preset {row['preset']:<7} F = {score}")
    for preset, stats in summary["presets"].items():
        print(f"  mean F (preset {preset}, {stats['levels']} levels) = {stats['mean_F']:.4f}")
    print(f"{'='*60}\n")
    return EXIT_SIMULATION if any(row["partial"] for row in summary["levels"]) else EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    orchestrator = _orchestrator(args)
    written = orchestrator.write_report(args.in_dir, args.out)
    print(f"Wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_validate_level(args: argparse.Namespace) -> int:
    tileset = resolve_tileset(args.tileset) if args.tileset else None
    level = load_level(args.path, tileset=tileset)
    walkable = float(level.nav_grid.cells.mean())
    print(f"OK: level '{level.id}' with {len(level.objects)} objects, {walkable:.1%} walkable")
    return EXIT_OK


def cmd_validate_tileset(args: argparse.Namespace) -> int:
    tileset = load_tileset(args.path)
    print(f"OK: tileset '{tileset.name}' with {len(tileset)} tiles")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Exploratory level evaluation - generate levels and score them with metric-driven agents",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Generate five preset A levels
    python main.py generate --preset A --count 5 --seed 7 --out levels/

    # Run the full battery over a directory of levels
    python main.py evaluate --levels levels/ --out results/ --config experiments/default_battery.yaml

    # Render histograms, heatmaps and bar charts
    python main.py report results/ --out reports/
        """,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate = subparsers.add_parser("generate", help="Generate levels with wave function collapse")
    generate.add_argument("--preset", choices=["A", "B"], required=True, help="Generator weight preset")
    generate.add_argument("--count", type=int, default=1, help="Number of levels (default: 1)")
    generate.add_argument("--seed", type=int, default=0, help="Seed of the first level (default: 0)")
    generate.add_argument("--out", default="levels", help="Output directory (default: levels)")
    generate.add_argument("--tileset", help="Tileset file (default: shipped tileset)")
    generate.add_argument("--config", help="Experiment configuration YAML")
    generate.set_defaults(handler=cmd_generate)

    evaluate = subparsers.add_parser("evaluate", help="Run the agent battery and compute fitness")
    evaluate.add_argument("--levels", nargs="+", required=True, help="Level files or directories")
    evaluate.add_argument("--out", default="results", help="Run directory (default: results)")
    evaluate.add_argument("--config", help="Experiment configuration YAML")
    evaluate.add_argument("--duration", type=float, help="Simulated seconds per episode")
    evaluate.add_argument("--spawns", type=int, help="Spawn points per level")
    evaluate.add_argument("--workers", type=int, help="Worker processes (1 runs inline)")
    evaluate.add_argument("--seed", type=int, help="Master seed")
    evaluate.set_defaults(handler=cmd_evaluate)

    report = subparsers.add_parser("report", help="Render SVG reports from an evaluation run")
    report.add_argument("in_dir", help="Run directory written by evaluate")
    report.add_argument("--out", default="reports", help="Output directory (default: reports)")
    report.add_argument("--config", help="Experiment configuration YAML")
    report.set_defaults(handler=cmd_report)

    validate_level = subparsers.add_parser("validate-level", help="Parse and build a level file")
    validate_level.add_argument("path", help="Level YAML file")
    validate_level.add_argument("--tileset", help="Tileset overriding the level's tileset_ref")
    validate_level.set_defaults(handler=cmd_validate_level)

    validate_tileset = subparsers.add_parser("validate-tileset", help="Check a tileset file")
    validate_tileset.add_argument("path", help="Tileset YAML file")
    validate_tileset.set_defaults(handler=cmd_validate_tileset)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    _configure_logging(args.verbose)

    try:
        return args.handler(args)
    except (WFCContradictionError, SpawnSelectionError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SIMULATION
    except ValidationError as e:
        print(f"Error: invalid configuration\n{e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, yaml.YAMLError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception(f"{args.command} failed")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
