"""Directional checks on the default desk dataset (minutes each; ``pytest -m slow``)."""

from __future__ import annotations

import pytest

from umia_lab.harness import config_from_mapping, run_experiment

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2]
TIE = 0.02

OVERFIT_RETRAIN = {
    "seeds": SEEDS,
    "overfit": {"original": "high", "unlearned": "high"},
    "unlearn": {"method": "retrain"},
}


def _median(root, name: str, **overrides) -> dict[str, float]:
    raw = {**OVERFIT_RETRAIN, "name": name}
    for key, value in overrides.items():
        raw[key] = {**raw.get(key, {}), **value} if isinstance(value, dict) else value
    return run_experiment(config_from_mapping(raw), root).aggregate["median"]


@pytest.fixture(scope="module")
def root(tmp_path_factory):
    return tmp_path_factory.mktemp("desk")


@pytest.fixture(scope="module")
def baseline(root):
    return _median(root, "cds_retrain", attack={"feature_mode": "CDS", "baselines": True})


def test_attack_beats_chance_and_two_round(baseline):
    assert baseline["micro_f1"] > 0.40
    assert baseline["micro_f1"] >= baseline["baselines.two_round_micro_f1"] - TIE


def test_retain_set_is_more_exposed_after_unlearning(baseline):
    assert baseline["retain_mia.post"] >= baseline["retain_mia.pre"]


def test_defenses_order_attack_success(root, baseline):
    scores = [baseline["micro_f1"]]
    for name, defense in (
        ("label_only", {"kind": "label_only"}),
        ("dropout", {"kind": "dropout"}),
        ("dp_eps5", {"kind": "dp", "epsilon": 5.0}),
        ("dp_eps2", {"kind": "dp", "epsilon": 2.0}),
    ):
        scores.append(_median(root, name, defense=defense, attack={"baselines": False})["micro_f1"])
    for stronger, weaker in zip(scores, scores[1:]):
        assert stronger >= weaker - TIE, scores


def test_confidence_features_beat_full_posteriors(root, baseline):
    cp = _median(root, "cp", attack={"feature_mode": "CP", "baselines": False})["micro_f1"]
    ct = _median(root, "ct", attack={"feature_mode": "CT", "baselines": False})["micro_f1"]
    assert ct >= cp
    assert baseline["micro_f1"] >= cp


def test_overfitting_increases_leakage(root):
    high = _median(root, "overfit_high", attack={"baselines": False})["micro_f1"]
    low = _median(root, "overfit_low", overfit={"original": "low", "unlearned": "low"}, attack={"baselines": False})
    assert high - low["micro_f1"] >= 0.05
