from __future__ import annotations

import math

import numpy as np
import pytest
from sklearn.metrics import f1_score

from umia_lab.core.errors import ConfigurationError, DataError, UndefinedMetricError
from umia_lab.metrics import (
    confusion,
    entropy,
    kl_to_uniform,
    micro_f1,
    overfitting_degree,
    per_class_f1,
    sample_scores,
    separability_report,
    tpr_at_fpr,
    tpr_at_fpr_all,
)
from umia_lab.models import ConfusionMatrix
from umia_lab.nn import init_model

TRUTH = [0, 0, 1, 1, 1, 2]
PREDS = [0, 0, 1, 1, 2, 2]


def test_confusion_rows_are_truth():
    cm = confusion(PREDS, TRUTH)
    assert cm.counts[1][2] == 1
    assert np.diag(cm.counts).tolist() == [2, 2, 1]
    assert cm.total == 6


def test_confusion_rejects_bad_input():
    with pytest.raises(UndefinedMetricError):
        confusion([], [])
    with pytest.raises(DataError):
        confusion([0, 3], [0, 1])
    with pytest.raises(DataError):
        confusion([0, 1], [0])


def test_micro_f1_is_accuracy():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        cm = ConfusionMatrix(counts=rng.integers(1, 50, size=(3, 3)))
        assert micro_f1(cm) == pytest.approx(cm.trace / cm.total, rel=1e-12)


def test_f1_agrees_with_sklearn():
    rng = np.random.default_rng(1)
    truth = rng.integers(0, 3, size=300)
    preds = np.where(rng.random(300) < 0.6, truth, rng.integers(0, 3, size=300))
    cm = confusion(preds, truth)
    assert micro_f1(cm) == pytest.approx(f1_score(truth, preds, average="micro"))
    np.testing.assert_allclose(per_class_f1(cm), f1_score(truth, preds, average=None, labels=[0, 1, 2]))


def test_per_class_f1_example():
    unseen, forget, retain = per_class_f1(confusion(PREDS, TRUTH))
    assert unseen == 1.0
    assert forget == pytest.approx(0.8)
    assert retain == pytest.approx(2 / 3)


def test_absent_class_scores_zero():
    assert per_class_f1(confusion([0, 0, 0], [0, 0, 0])) == (1.0, 0.0, 0.0)


def test_random_guessing_is_near_one_third():
    rng = np.random.default_rng(2)
    cm = confusion(rng.integers(0, 3, size=10_000), rng.integers(0, 3, size=10_000))
    assert abs(micro_f1(cm) - 1 / 3) < 0.05


def test_tpr_of_perfect_scores():
    truth = np.repeat([0, 1, 2], 50)
    scores = np.eye(3)[truth]
    assert tpr_at_fpr_all(scores, truth) == (1.0, 1.0, 1.0)


def test_tpr_of_constant_scores_is_zero():
    truth = np.repeat([0, 1, 2], 20)
    assert tpr_at_fpr(np.full((60, 3), 1 / 3), truth, 1) == 0.0


def _sweep_tpr(column: np.ndarray, truth: np.ndarray, k: int, budget: float) -> float:
    negatives = column[truth != k]
    positives = column[truth == k]
    for threshold in sorted(set(negatives.tolist())):
        if np.mean(negatives > threshold) <= budget:
            return float(np.mean(positives > threshold))
    raise AssertionError("the largest negative always satisfies the budget")


@pytest.mark.parametrize("seed", range(5))
def test_tpr_matches_threshold_sweep(seed):
    rng = np.random.default_rng(seed)
    truth = rng.integers(0, 3, size=400)
    scores = rng.dirichlet(np.ones(3), size=400)
    scores[np.arange(400), truth] += rng.random(400) * 0.5
    scores = np.round(scores, 2)
    for k in range(3):
        for budget in (0.01, 0.05, 0.2):
            assert tpr_at_fpr(scores, truth, k, budget) == _sweep_tpr(scores[:, k], truth, k, budget)


def test_tpr_counts_scores_strictly_above_threshold():
    column = np.array([0.1] * 19 + [0.9] + [0.9, 0.95])
    truth = np.array([0] * 20 + [1, 1])
    assert tpr_at_fpr(column, truth, 1, 0.01) == 0.5
    assert tpr_at_fpr(column, truth, 1, 0.05) == 1.0


def test_tpr_grows_with_budget():
    rng = np.random.default_rng(9)
    truth = rng.integers(0, 3, size=500)
    scores = rng.random((500, 3))
    values = [tpr_at_fpr(scores, truth, 2, b) for b in (0.001, 0.01, 0.1, 0.5, 0.9)]
    assert values == sorted(values)


def test_tpr_undefined_without_positives():
    truth = np.zeros(10, dtype=int)
    with pytest.raises(UndefinedMetricError):
        tpr_at_fpr(np.full((10, 3), 1 / 3), truth, 1)
    assert all(math.isnan(v) for v in tpr_at_fpr_all(np.full((10, 3), 1 / 3), truth)[1:])


def test_tpr_budget_bounds():
    with pytest.raises(ConfigurationError):
        tpr_at_fpr(np.zeros((2, 3)), [0, 1], 0, 0.0)


def test_overfitting_degree():
    assert overfitting_degree(0.9, 0.6) == pytest.approx(0.3)
    assert overfitting_degree(0.5, 0.7) == pytest.approx(-0.2)
    with pytest.raises(ConfigurationError):
        overfitting_degree(1.2, 0.5)


def test_entropy_extremes():
    assert entropy(np.full(10, 0.1)) == pytest.approx(math.log(10))
    assert entropy(np.eye(4)[1]) == 0.0
    assert kl_to_uniform(np.full(10, 0.1)) == pytest.approx(0.0, abs=1e-12)


class _FixedVerdict:
    def __init__(self, verdict: int) -> None:
        self.verdict = verdict

    def predict_membership(self, probs: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(probs).shape[0], self.verdict)


def test_vulnerability_is_fraction_of_correct_attacks(blobs):
    model = init_model([4, 8, 3], "relu", 0)
    ensemble = [_FixedVerdict(1), _FixedVerdict(1), _FixedVerdict(1), _FixedVerdict(0)]
    scores = sample_scores(model, blobs, "vulnerability", mia_ensemble=ensemble)
    np.testing.assert_allclose(scores, 0.75)
    outsiders = sample_scores(model, blobs, "vulnerability", ensemble, membership=np.zeros(len(blobs), dtype=int))
    np.testing.assert_allclose(outsiders, 0.25)


def test_vulnerability_needs_an_ensemble(blobs):
    with pytest.raises(ConfigurationError):
        sample_scores(init_model([4, 3], "relu", 0), blobs, "vulnerability", mia_ensemble=[_FixedVerdict(1)])


def test_unknown_score_kind(blobs):
    with pytest.raises(ConfigurationError):
        sample_scores(init_model([4, 3], "relu", 0), blobs, "loudness")


def test_separability_of_unchanged_model(blobs, split):
    model = init_model([4, 8, 3], "relu", 3)
    report = separability_report(model, model, split, blobs)
    assert report.pre == report.post
    assert report.pre.acc_gap_retain_unseen == pytest.approx(report.pre.acc_retain - report.pre.acc_unseen)
    assert report.pre.dist_retain_forget >= 0.0
