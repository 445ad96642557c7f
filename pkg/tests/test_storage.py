import pytest
import yaml
from pydantic import ValidationError

from conftest import FLAT, MESA, box, flat_level, grid_of, make_tileset

from src.core.agent import TraceLog
from src.core.wfcgen import generate
from src.core.world import build_level
from src.services.storage import ResultStore, find_level_files, level_to_dict, load_level, save_level


def test_generated_level_round_trips_with_same_fingerprint(shipped_tileset, tmp_path):
    level = build_level(generate(shipped_tileset, "A", 3), shipped_tileset, level_id="level_A_3", generator=("A", 3))

    restored = load_level(save_level(level, tmp_path / "level.yaml"))

    assert restored.fingerprint() == level.fingerprint()
    assert restored.generator == ("A", 3)
    assert "objects_override" not in level_to_dict(level)


def test_object_override_round_trips(tmp_path):
    level = flat_level([box("crate", 150.0, 120.0, size=4.0), box("bush", 60.0, 60.0, kind="bush", blocking=False)])

    restored = load_level(save_level(level, tmp_path / "level.yaml"))

    assert restored.objects == level.objects
    assert restored.fingerprint() == level.fingerprint()


def test_level_file_needs_every_cell(tmp_path):
    data = level_to_dict(flat_level())
    data["tiles"] = data["tiles"][:-1]
    path = tmp_path / "broken.yaml"
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")

    with pytest.raises(ValidationError):
        load_level(path)


def test_missing_level_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_level(tmp_path / "nope.yaml")


def test_find_level_files_expands_directories(tmp_path):
    for name in ("b", "a"):
        save_level(flat_level(level_id=name), tmp_path / f"{name}.yaml")
    ResultStore(tmp_path / "run").write_level(flat_level(level_id="c"))

    assert [p.name for p in find_level_files([tmp_path])] == ["a.yaml", "b.yaml"]
    assert find_level_files([tmp_path / "run"]) == [tmp_path / "run" / "c" / "level.yaml"]
    with pytest.raises(FileNotFoundError):
        find_level_files([tmp_path / "missing"])


def test_trace_names_keep_hyphenated_configs(tmp_path):
    store = ResultStore(tmp_path)
    store.write_trace(TraceLog(header={"config": "large-object"}), "lvl", "large-object", 2)

    assert list(store.iter_traces("lvl")) == [("large-object", 2, store.trace_path("lvl", "large-object", 2))]

def test_run_store_rebuilds_levels_with_the_given_walkable_rise(tmp_path):
    level = build_level(grid_of(FLAT, {(3, 3): (MESA, 0)}), make_tileset(), level_id="mesa", walkable_rise=12.0)
    store = ResultStore(tmp_path)
    store.write_level(level)

    assert store.load_level("mesa", walkable_rise=12.0).fingerprint() == level.fingerprint()
    assert store.load_level("mesa").fingerprint() != level.fingerprint()
