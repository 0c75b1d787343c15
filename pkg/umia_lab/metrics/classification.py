"""Tri-class attack metrics: confusion counts, micro/per-class F1 and TPR at a fixed FPR."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.metrics import confusion_matrix, f1_score, roc_curve

from umia_lab.core.config import NUMERIC
from umia_lab.core.errors import ConfigurationError, DataError, UndefinedMetricError
from umia_lab.models import ConfusionMatrix


LABELS = [0, 1, 2]


def confusion(preds: Sequence[int] | np.ndarray, truth: Sequence[int] | np.ndarray) -> ConfusionMatrix:
    predicted = np.asarray(preds, dtype=np.int64)
    actual = np.asarray(truth, dtype=np.int64)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise DataError(f"predictions {predicted.shape} and truth {actual.shape} differ in shape")
    if predicted.size == 0:
        raise UndefinedMetricError("confusion matrix needs at least one example")
    for name, values in (("predictions", predicted), ("truth", actual)):
        if values.min() < 0 or values.max() > 2:
            raise DataError(f"{name} must use the 0/1/2 membership encoding")
    return ConfusionMatrix(counts=confusion_matrix(actual, predicted, labels=LABELS))


def _expand(cm: ConfusionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Label vectors (truth, predictions) that reproduce the counts of ``cm``."""

    weights = np.asarray(cm.counts, dtype=np.int64).ravel()
    truth = np.repeat(np.repeat(LABELS, 3), weights)
    preds = np.repeat(np.tile(LABELS, 3), weights)
    return truth, preds


def micro_f1(cm: ConfusionMatrix) -> float:
    """Micro F1 from pooled counts; in single-label data it reduces to ``trace / total``."""

    if cm.total == 0:
        raise UndefinedMetricError("micro F1 is undefined on an empty confusion matrix")
    truth, preds = _expand(cm)
    return float(f1_score(truth, preds, labels=LABELS, average="micro", zero_division=0))


def per_class_f1(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """F1 per membership class; a class with precision + recall = 0 scores 0."""

    if cm.total == 0:
        raise UndefinedMetricError("per-class F1 is undefined on an empty confusion matrix")
    truth, preds = _expand(cm)
    scores = f1_score(truth, preds, labels=LABELS, average=None, zero_division=0)
    return float(scores[0]), float(scores[1]), float(scores[2])


def tpr_at_fpr(
    scores: np.ndarray,
    truth: Sequence[int] | np.ndarray,
    class_k: int,
    fpr_budget: float = NUMERIC.fpr_budget,
) -> float:
    """One-vs-rest TPR for ``class_k`` at the smallest threshold whose FPR fits the budget.

    A sample is flagged positive when its score is strictly above the threshold, a
    negative score. That equals ``>=`` at the next distinct score, where ``roc_curve``
    puts its points.
    """

    if not 0.0 < fpr_budget < 1.0:
        raise ConfigurationError(f"fpr_budget must lie in (0, 1), got {fpr_budget}")
    posteriors = np.asarray(scores, dtype=np.float64)
    actual = np.asarray(truth, dtype=np.int64)
    column = posteriors[:, class_k] if posteriors.ndim == 2 else posteriors
    is_positive = actual == class_k
    if is_positive.all() or not is_positive.any():
        raise UndefinedMetricError(f"class {class_k} needs both positives and negatives for TPR@FPR")
    fpr, tpr, _ = roc_curve(is_positive, column, drop_intermediate=False)
    return float(tpr[fpr <= fpr_budget].max())


def tpr_at_fpr_all(
    scores: np.ndarray, truth: np.ndarray, fpr_budget: float = NUMERIC.fpr_budget
) -> tuple[float, float, float]:
    """TPR@FPR for each class; classes lacking positives or negatives report NaN."""

    values = []
    for k in range(3):
        try:
            values.append(tpr_at_fpr(scores, truth, k, fpr_budget))
        except UndefinedMetricError:
            values.append(float("nan"))
    return values[0], values[1], values[2]


def overfitting_degree(train_acc: float, test_acc: float) -> float:
    for name, value in (("train_acc", train_acc), ("test_acc", test_acc)):
        if not 0.0 <= value <= 1.0:
            raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")
    return float(train_acc - test_acc)
