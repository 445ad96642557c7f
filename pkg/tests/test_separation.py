"""End-to-end check that the shipped presets are told apart by level fitness."""

from pathlib import Path

import numpy as np
import pytest

from src.orchestrator import ExperimentOrchestrator

BATTERY = Path(__file__).resolve().parent.parent / "experiments" / "default_battery.yaml"
LEVELS_PER_PRESET = 5


@pytest.mark.slow
def test_preset_a_levels_outscore_preset_b_levels(tmp_path):
    orchestrator = ExperimentOrchestrator().load_config(BATTERY)
    assert orchestrator.config.master_seed == 1
    levels = orchestrator.generate_levels("A", LEVELS_PER_PRESET, seed=1) + orchestrator.generate_levels(
        "B", LEVELS_PER_PRESET, seed=1
    )

    summary = orchestrator.run(levels, tmp_path)

    scores = {"A": [], "B": []}
    for row in summary["levels"]:
        assert not row["partial"], row["id"]
        scores[row["preset"]].append(row["F"])
    mean_a, mean_b = float(np.mean(scores["A"])), float(np.mean(scores["B"]))
    assert mean_a - mean_b >= 0.10
    assert min(scores["A"]) > mean_b
