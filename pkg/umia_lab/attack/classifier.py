"""The tri-class attack classifier: training and inference."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np

from umia_lab.core.config import ATTACK_TRAINING
from umia_lab.core.errors import DataError, ShapeError
from umia_lab.models import AttackDataset, Dataset, FeatureMode, ModelParams, TrainConfig
from umia_lab.nn import init_model, predict_proba, train

from .features import derive_feature_matrix


logger = logging.getLogger(__name__)


def attack_train_config(seed: int = 0) -> TrainConfig:
    return TrainConfig(
        epochs=ATTACK_TRAINING.epochs,
        batch_size=ATTACK_TRAINING.batch_size,
        learning_rate=ATTACK_TRAINING.learning_rate,
        weight_decay=ATTACK_TRAINING.weight_decay,
        optimizer=ATTACK_TRAINING.optimizer,
        seed=seed,
    )


@dataclass(frozen=True, slots=True, eq=False)
class AttackClassifier:
    model: ModelParams
    feature_mode: FeatureMode

    @property
    def input_dim(self) -> int:
        return self.model.input_dim

    def posteriors(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.input_dim:
            raise ShapeError(f"classifier expects {self.input_dim} features, got {features.shape[1]}")
        return predict_proba(self.model, features)

    def predict(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Labels (argmax, lowest index on ties) and the raw posterior triples."""

        probs = self.posteriors(features)
        return np.argmax(probs, axis=1), probs


def train_attack(attack_set: AttackDataset, cfg: TrainConfig | None = None) -> AttackClassifier:
    """Fit the ``[dim, 32, 16, 3]`` ReLU classifier on the attack features."""

    counts = attack_set.class_counts
    if len(attack_set) == 0 or min(counts) == 0:
        raise DataError(f"attack set must contain all three membership classes, got counts {counts}")
    cfg = cfg or attack_train_config()
    dim = attack_set.features.shape[1]
    params = init_model((dim, *ATTACK_TRAINING.hidden_sizes, 3), "relu", cfg.seed)
    data = Dataset(features=attack_set.features, labels=attack_set.labels, name="attack", num_classes=3)
    logger.info(
        "Entrenando clasificador de ataque %s con %d ejemplos (por clase %s)",
        attack_set.feature_mode.label(),
        len(attack_set),
        counts,
    )
    return AttackClassifier(model=train(params, data, cfg), feature_mode=attack_set.feature_mode)


def infer(
    classifier: AttackClassifier,
    p_orig: np.ndarray,
    p_unlearn: np.ndarray,
    true_label: int,
    mode: FeatureMode | None = None,
) -> tuple[int, np.ndarray]:
    """Membership verdict in {0, 1, 2} for one query plus the posterior triple."""

    labels, probs = infer_batch(
        classifier, np.atleast_2d(p_orig), np.atleast_2d(p_unlearn), np.array([true_label]), mode
    )
    return int(labels[0]), probs[0]


def infer_batch(
    classifier: AttackClassifier,
    p_orig: np.ndarray,
    p_unlearn: np.ndarray,
    true_labels: np.ndarray,
    mode: FeatureMode | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    mode = mode or classifier.feature_mode
    if mode.dim(np.shape(p_orig)[-1]) != classifier.input_dim:
        raise ShapeError(
            f"feature mode {mode.label()} has width {mode.dim(np.shape(p_orig)[-1])}, "
            f"classifier expects {classifier.input_dim}"
        )
    return classifier.predict(derive_feature_matrix(p_orig, p_unlearn, true_labels, mode))
