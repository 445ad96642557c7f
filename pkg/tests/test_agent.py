from collections import Counter

import pytest

from conftest import box, flat_level

from src.config.schema import ExperimentConfig
from src.core.agent import (
    AgentParams,
    AgentState,
    MoveInDirection,
    MoveToObject,
    TraceLog,
    decide,
    decide_random,
    pose_of,
    run_episode,
    run_random_control,
    step,
)
from src.core.evaluation import motivation_avg
from src.core.errors import MotivationUnavailableError
from src.core.perception import AgentPose
from src.metrics.scoring import MetricConfig, MetricState
from src.utils.rng import XorShiftRandom


def _scattered_level():
    return flat_level([
        box("crate-1", 150.0, 120.0, size=4.0),
        box("crate-2", 200.0, 60.0, size=3.0),
        box("house", 250.0, 200.0, size=12.0, kind="house"),
        box("barrel", 80.0, 250.0, size=2.0, kind="barrel"),
        box("bush", 300.0, 300.0, size=3.0, kind="bush", blocking=False),
    ])


# --- Parameters ---

def test_params_from_config_carry_experiment_values():
    params = AgentParams.from_config(ExperimentConfig(), duration=20.0)

    assert params.view.length_of_view == 115.0
    assert params.view.field_of_view == 90.0
    assert params.ticks_per_decision == 10
    assert params.tick_count == 200


def test_decision_time_must_be_whole_ticks():
    with pytest.raises(ValueError):
        AgentParams(decision_time=0.15, tick=0.1)


# --- Decisions ---

def test_equal_scores_are_broken_uniformly(params):
    level = flat_level()
    pose = AgentPose((175.0, 2.0, 175.0), 0.0)
    config = MetricConfig.from_token("group")
    rng = XorShiftRandom(2024)

    counts = Counter(
        decide(level, pose, config, MetricState(), rng, params, visible=[]).decision.direction_index
        for _ in range(10_000)
    )

    assert set(counts) == {0, 1, 2, 3, 4, 32, 33, 34, 35}
    for count in counts.values():
        assert abs(count / 10_000 - 1 / 9) <= 0.02


def test_best_object_becomes_a_path_target(params):
    level = flat_level([box("crate", 160.0, 100.0)])
    pose = AgentPose((100.0, 2.0, 100.0), 0.0)

    outcome = decide(level, pose, MetricConfig.from_token("large-object"), MetricState(), XorShiftRandom(1), params)

    assert isinstance(outcome.decision, MoveToObject)
    assert outcome.decision.object_id == "crate"
    assert outcome.decision.direction_index == 0
    assert outcome.decision.goal == pytest.approx((150.0, 100.0))
    assert outcome.score == pytest.approx(1.0)
    assert outcome.state.largest_seen == pytest.approx(8.0)


def test_object_within_reach_gives_a_straight_move(params):
    level = flat_level([box("crate", 112.0, 100.0)])
    pose = AgentPose((100.0, 2.0, 100.0), 0.0)

    outcome = decide(level, pose, MetricConfig.from_token("large-object"), MetricState(), XorShiftRandom(1), params)

    assert isinstance(outcome.decision, MoveInDirection)
    assert outcome.decision.distance == 50.0


def test_random_control_stays_in_view_and_has_no_score(params):
    pose = AgentPose((100.0, 2.0, 100.0), 90.0)
    rng = XorShiftRandom(3)

    for _ in range(200):
        outcome = decide_random(pose, rng, params)
        assert outcome.score is None
        assert outcome.decision.direction_index in range(5, 14)


# --- Movement ---

def test_step_moves_speed_times_tick(params):
    state = AgentState((100.0, 100.0), 0.0, [(150.0, 100.0)])

    moved, event = step(flat_level(), state, params)

    assert moved.position == pytest.approx((101.0, 100.0))
    assert event is None


def test_step_reports_reaching_the_last_waypoint(params):
    state = AgentState((100.0, 100.0), 0.0, [(100.5, 100.0)])

    moved, event = step(flat_level(), state, params)

    assert moved.position == pytest.approx((100.5, 100.0))
    assert event == "reached"


def test_blocked_without_progress_turns_around(params):
    level = flat_level([box("wall", 102.5, 102.5, size=5.0)])
    state = AgentState((99.9, 102.5), 0.0, [(150.0, 102.5)])

    moved, event = step(level, state, params)

    assert event == "blocked"
    assert moved.position == pytest.approx((99.9, 102.5))
    assert moved.heading == pytest.approx(180.0)


def test_pose_sits_eye_height_above_ground(params):
    pose = pose_of(flat_level(), AgentState((50.0, 60.0), 30.0), params.eye_height)

    assert pose.position == (50.0, 2.0, 60.0)
    assert pose.heading == 30.0


# --- Episodes ---

def test_episode_is_reproducible(params):
    level = _scattered_level()
    config = MetricConfig.from_token("all")

    first = run_episode(level, (100.0, 100.0), config, params, seed=11)
    second = run_episode(level, (100.0, 100.0), config, params, seed=11)

    assert first.to_lines() == second.to_lines()
    assert first.config == "all"
    assert len(first.ticks) == 50


def test_episode_samples_motivation_once_per_decision_time(params):
    trace = run_episode(_scattered_level(), (100.0, 100.0), MetricConfig.from_token("openness"), params, seed=4)

    samples = trace.motivation_samples()
    assert len(samples) == 5
    assert all(0.0 <= s <= 1.0 for s in samples)
    assert trace.decisions[0].k == 0 and trace.decisions[0].scheduled


def test_episode_stays_on_walkable_ground(params):
    level = _scattered_level()
    trace = run_episode(level, (100.0, 100.0), MetricConfig.from_token("all"), params, seed=8)

    for x, z in trace.positions():
        assert level.in_bounds(x, z)
        assert level.nav_grid.is_walkable(x, z)


def test_open_empty_level_gives_no_openness_motivation(params):
    trace = run_episode(flat_level(), (175.0, 175.0), MetricConfig.from_token("openness"), params, seed=6)

    samples = trace.motivation_samples()
    assert samples
    assert all(s == 0.0 for s in samples)


def test_random_control_trace_has_no_motivation(params):
    trace = run_random_control(_scattered_level(), (100.0, 100.0), params, seed=5)

    assert trace.config == "random"
    assert not trace.has_motivation()
    with pytest.raises(MotivationUnavailableError):
        motivation_avg(trace)


def test_spawn_on_blocked_cell_is_snapped(params):
    level = flat_level([box("rock", 102.5, 102.5, size=5.0)])

    trace = run_random_control(level, (102.5, 102.5), params, seed=1)

    assert level.nav_grid.is_walkable(*trace.positions()[0])


def test_trace_survives_a_file_round_trip(params, tmp_path):
    trace = run_episode(_scattered_level(), (100.0, 100.0), MetricConfig.from_token("group"), params, seed=2)

    restored = TraceLog.read(trace.write(tmp_path / "trace.jsonl"))

    assert restored.to_lines() == trace.to_lines()
    assert restored.object_kinds["house"] == "house"


def test_missing_trace_file_is_reported(tmp_path):
    with pytest.raises(FileNotFoundError):
        TraceLog.read(tmp_path / "missing.jsonl")
