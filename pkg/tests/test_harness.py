from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

from umia_lab.core.config import ENCODING_HEADER
from umia_lab.core.errors import ConfigurationError, DataError, StageError
from umia_lab.harness import (
    COMPARISON_COLUMNS,
    StageTracker,
    config_from_mapping,
    constant_adversary,
    load_config,
    load_suite,
    oracle_adversary,
    play_game,
    render_aggregate,
    resolve_output_root,
    run_experiment,
    run_suite,
    run_ulira,
    simulate_game,
)
from umia_lab.harness.cli import main
from umia_lab.harness.report_io import flatten_report, sanitize, write_confusion_csv, write_predictions_csv
from umia_lab.metrics import confusion

SEED_FILES = ("report.json", "confusion.csv", "predictions.csv", "split.json", "attack_train.csv")


def test_unknown_key_is_reported_by_path(tiny_raw):
    tiny_raw["attack"] = {**tiny_raw["attack"], "bogus": 1}
    with pytest.raises(ConfigurationError, match="unknown configuration key 'attack.bogus'"):
        config_from_mapping(tiny_raw)


def test_invalid_overfit_preset(tiny_raw):
    tiny_raw["overfit"] = {"original": "extreme"}
    with pytest.raises(ConfigurationError, match="extreme"):
        config_from_mapping(tiny_raw)


def test_sections_are_normalised(tiny_raw):
    tiny_raw["attack"] = {**tiny_raw["attack"], "feature_mode": "cds"}
    tiny_raw["shadow"] = {**tiny_raw["shadow"], "model": {"hidden_sizes": [8]}}
    cfg = config_from_mapping(tiny_raw)
    assert cfg.attack.feature_mode == "CDS"
    assert cfg.pipeline_spec(shadow=True).arch.hidden_sizes == (8,)
    assert cfg.pipeline_spec().arch.hidden_sizes == (16,)


def test_overfit_preset_reaches_pipeline(tiny_raw):
    tiny_raw["overfit"] = {"original": "high", "unlearned": "low"}
    spec = config_from_mapping(tiny_raw).pipeline_spec()
    assert (spec.train.epochs, spec.train.weight_decay) == (200, 0.0)
    assert (spec.unlearned_train.epochs, spec.unlearned_train.weight_decay) == (20, 1e-2)


def test_digest_ignores_seeds_and_output(tiny_raw):
    base = config_from_mapping(tiny_raw).digest()
    assert config_from_mapping({**tiny_raw, "seeds": [4, 5], "output_root": "/elsewhere", "workers": 3}).digest() == base
    changed = {**tiny_raw, "train": {**tiny_raw["train"], "epochs": 11}}
    assert config_from_mapping(changed).digest() != base


def test_load_config_from_yaml(tmp_path, tiny_raw, tiny_config):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(tiny_raw), encoding="utf-8")
    assert load_config(path).digest() == tiny_config.digest()


def test_broken_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("name: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match="YAML"):
        load_config(path)


def test_suite_entries_merge_over_base(tmp_path):
    path = tmp_path / "grid.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "name": "grid",
                "base": {"train": {"epochs": 3, "batch_size": 8}},
                "experiments": [{"name": "a"}, {"name": "b", "train": {"epochs": 5}}],
            }
        ),
        encoding="utf-8",
    )
    name, entries = load_suite(path)
    assert name == "grid"
    assert entries[1]["train"] == {"epochs": 5, "batch_size": 8}


def test_output_root_precedence(monkeypatch, tmp_path, tiny_config):
    monkeypatch.delenv("UMIA_LAB_OUTPUT_ROOT", raising=False)
    assert str(resolve_output_root(tiny_config)) == "runs"
    from_file = config_from_mapping({"output_root": str(tmp_path / "file")})
    assert resolve_output_root(from_file) == tmp_path / "file"
    monkeypatch.setenv("UMIA_LAB_OUTPUT_ROOT", str(tmp_path / "env"))
    assert resolve_output_root(from_file) == tmp_path / "env"
    assert resolve_output_root(from_file, tmp_path / "flag") == tmp_path / "flag"


def test_stage_tracker_records_and_wraps(tmp_path):
    tracker = StageTracker()
    assert tracker.run("ok", lambda: 41 + 1, seed=0) == 42

    def explode():
        raise ValueError("boom")

    with pytest.raises(StageError) as info:
        tracker.run("bad", explode, seed=0)
    assert info.value.stage == "bad"
    assert str(info.value) == "[bad] boom"
    assert isinstance(info.value.__cause__, ValueError)
    assert tracker.failures == {"bad": 1}
    snapshot = json.loads(tracker.write(tmp_path / "diag.json").read_text(encoding="utf-8"))
    assert [s["stage"] for s in snapshot["stages"]] == ["ok", "bad"]
    assert snapshot["last_error"]["type"] == "ValueError"


def test_nested_stage_errors_keep_inner_stage():
    tracker = StageTracker()

    def inner():
        return tracker.run("inner", lambda: 1 / 0)

    with pytest.raises(StageError) as info:
        tracker.run("outer", inner)
    assert info.value.stage == "inner"


def test_sanitize_and_flatten():
    payload = sanitize({"a": np.float64("nan"), "b": np.int64(3), "c": (1.0, 2.0, 3.0)})
    assert payload == {"a": None, "b": 3, "c": [1.0, 2.0, 3.0]}
    assert flatten_report({"seed": 0, "retain_mia": {"pre": 0.5}, "per_class_f1": [0.1, 0.2, 0.3]}) == {
        "seed": 0,
        "retain_mia.pre": 0.5,
        "per_class_f1.unseen": 0.1,
        "per_class_f1.forget": 0.2,
        "per_class_f1.retain": 0.3,
    }


def test_confusion_csv_header(tmp_path):
    path = write_confusion_csv(confusion([0, 1, 2, 2], [0, 1, 1, 2]), tmp_path / "cm.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# {ENCODING_HEADER}"
    frame = pd.read_csv(path, comment="#", index_col=0)
    assert frame.loc["forget", "retain"] == 1
    stamped = write_confusion_csv(confusion([0, 1], [0, 1]), tmp_path / "stamped.csv", "abc123")
    assert stamped.read_text(encoding="utf-8").splitlines()[0] == f"# {ENCODING_HEADER};config_digest=abc123"


def test_predictions_csv_header(tmp_path):
    probs = np.array([[0.2, 0.3, 0.5], [0.6, 0.3, 0.1]])
    path = write_predictions_csv([4, 9], [2, 0], [2, 1], probs, tmp_path / "p.csv", "abc123")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# {ENCODING_HEADER};config_digest=abc123"
    assert lines[1] == "index,true_set,predicted_set,p0,p1,p2"
    frame = pd.read_csv(path, comment="#")
    assert frame["predicted_set"].tolist() == [2, 1]


def test_constant_adversary_wins_a_third(split):
    result = simulate_game(split.pools(), constant_adversary(), 10_000, seed=0)
    assert abs(result.success_rate - 1 / 3) < 0.03
    assert sum(result.per_class_trials) == 10_000


def test_oracle_adversary_always_wins(split):
    pools = split.pools()
    assert simulate_game(pools, oracle_adversary(pools), 500, seed=1).success_rate == 1.0


def test_game_arguments(split):
    with pytest.raises(ConfigurationError):
        simulate_game(split.pools(), constant_adversary(), 0, seed=0)
    pools = {**split.pools(), 1: np.array([], dtype=np.int64)}
    with pytest.raises(DataError):
        simulate_game(pools, constant_adversary(), 10, seed=0)


def test_experiment_writes_run_tree(tmp_path, tiny_config):
    outcome = run_experiment(tiny_config, tmp_path)
    seed_dir = tmp_path / "tiny" / "seed_0"
    for name in SEED_FILES:
        assert (seed_dir / name).is_file(), name
    assert not (seed_dir / "privacy_ledger.json").exists()
    assert (tmp_path / "tiny" / "aggregate.json").is_file()
    assert (tmp_path / "tiny" / "diagnostics.json").is_file()
    report = json.loads((seed_dir / "report.json").read_text(encoding="utf-8"))
    for name in ("confusion.csv", "predictions.csv"):
        header = (seed_dir / name).read_text(encoding="utf-8").splitlines()[0]
        assert header == f"# {ENCODING_HEADER};config_digest={tiny_config.digest()}", name
    assert report["encoding"] == {"0": "unseen", "1": "forget", "2": "retain"}
    assert len(set(report["evaluation_sizes"])) == 1
    assert 0.0 <= report["micro_f1"] <= 1.0
    median = outcome.aggregate["median"]
    for key in ("micro_f1", "baselines.two_round_micro_f1", "retain_mia.pre", "retain_mia.post", "per_class_f1.unseen"):
        assert key in median
    assert outcome.aggregate["seeds"] == [0]


def test_experiment_is_reproducible(tmp_path, tiny_config):
    run_experiment(tiny_config, tmp_path / "a")
    run_experiment(tiny_config, tmp_path / "b")
    for name in ("report.json", "confusion.csv", "predictions.csv"):
        first = (tmp_path / "a" / "tiny" / "seed_0" / name).read_bytes()
        assert first == (tmp_path / "b" / "tiny" / "seed_0" / name).read_bytes(), name


def test_failing_stage_is_named(tmp_path, tiny_raw):
    tiny_raw["forget"] = {"fraction": 1.0}
    with pytest.raises(StageError) as info:
        run_experiment(config_from_mapping(tiny_raw), tmp_path)
    assert info.value.stage == "make_membership_split"
    diagnostics = json.loads((tmp_path / "tiny" / "diagnostics.json").read_text(encoding="utf-8"))
    assert diagnostics["stage_failures"] == {"make_membership_split": 1}
    assert "empty retain" in diagnostics["last_error"]["message"]


def test_aggregate_can_be_rerendered(tmp_path, tiny_config):
    run_experiment(tiny_config, tmp_path)
    aggregate = tmp_path / "tiny" / "aggregate.json"
    original = aggregate.read_text(encoding="utf-8")
    aggregate.unlink()
    assert render_aggregate(tmp_path / "tiny").read_text(encoding="utf-8") == original


def test_render_needs_reports(tmp_path):
    with pytest.raises(DataError):
        render_aggregate(tmp_path)


def _grid(tiny_raw):
    second = {**tiny_raw, "name": "tiny_ct", "attack": {**tiny_raw["attack"], "feature_mode": "CT"}}
    broken = {**tiny_raw, "name": "broken", "attack": {**tiny_raw["attack"], "bogus": True}}
    return [tiny_raw, second, broken]


def test_suite_rows(tmp_path, tiny_raw):
    frame = run_suite(_grid(tiny_raw), name="grid", output_root=tmp_path)
    assert list(frame.columns) == COMPARISON_COLUMNS
    assert (frame["row"] == "seed").sum() == 2
    assert (frame["row"] == "median").sum() == 2
    errors = frame[frame["row"] == "error"]
    assert errors["config"].tolist() == ["broken"]
    assert errors["error_stage"].tolist() == ["load_config"]
    assert "attack.bogus" in errors["error"].iloc[0]
    assert (tmp_path / "grid" / "comparison.csv").is_file()


def test_suite_table_is_reproducible(tmp_path, tiny_raw):
    run_suite(_grid(tiny_raw), name="grid", output_root=tmp_path / "a")
    run_suite(_grid(tiny_raw), name="grid", output_root=tmp_path / "b", workers=2)
    first = (tmp_path / "a" / "grid" / "comparison.csv").read_bytes()
    assert first == (tmp_path / "b" / "grid" / "comparison.csv").read_bytes()


def test_play_game_writes_result(tmp_path, tiny_config):
    result = play_game(tiny_config, 200, seed=0, output_root=tmp_path)
    assert result.trials == 200
    payload = json.loads((tmp_path / "tiny" / "seed_0" / "game.json").read_text(encoding="utf-8"))
    assert payload["successes"] == result.successes
    assert payload["config_digest"] == tiny_config.digest()


def test_ulira_run_writes_fit_and_evaluation(tmp_path, tiny_config):
    outcome = run_ulira(tiny_config, 0, tmp_path)
    seed_dir = tmp_path / "tiny" / "seed_0"
    for name in ("ulira_fit.json", "ulira_eval.json", "ulira_confusion.csv"):
        assert (seed_dir / name).is_file(), name
    assert outcome.confusion.total == 9
    assert outcome.fit.num_shadow == 2
    fit = json.loads((seed_dir / "ulira_fit.json").read_text(encoding="utf-8"))
    assert all(math.isfinite(fit[k]) for k in ("forget_mean", "unseen_mean", "retain_mean"))


def test_cli_run_and_report(tmp_path, tiny_raw):
    config = tmp_path / "tiny.yaml"
    config.write_text(yaml.safe_dump(tiny_raw), encoding="utf-8")
    assert main(["run", str(config), "--output", str(tmp_path / "out"), "--seed", "1"]) == 0
    assert (tmp_path / "out" / "tiny" / "seed_1" / "report.json").is_file()
    assert main(["report", str(tmp_path / "out" / "tiny")]) == 0


def test_cli_reports_lab_errors(tmp_path, tiny_raw):
    config = tmp_path / "bad.yaml"
    config.write_text(yaml.safe_dump({**tiny_raw, "bogus": 1}), encoding="utf-8")
    assert main(["run", str(config), "--output", str(tmp_path)]) == 1
    assert main(["report", str(tmp_path / "nothing")]) == 1


CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    if "experiments" in raw:
        _, entries = load_suite(path)
        assert all(config_from_mapping(entry).name for entry in entries)
    else:
        assert load_config(path).name == path.stem
