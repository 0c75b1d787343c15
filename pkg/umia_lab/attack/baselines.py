"""Baseline attacks: a binary MIA stand-in, the two-round attack and U-Leak."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np

from umia_lab.core.config import ATTACK_TRAINING, FORGET, RETAIN, UNSEEN
from umia_lab.core.errors import DataError, ShapeError
from umia_lab.core.seeding import derive_seed, rng_for
from umia_lab.models import Dataset, FeatureKind, FeatureMode, ModelParams, RetainAmplification, ShadowRecords, TrainConfig
from umia_lab.nn import init_model, predict_proba, train

from .attack_set import attack_set_from_records
from .classifier import AttackClassifier, attack_train_config, train_attack


logger = logging.getLogger(__name__)

NON_MEMBER, MEMBER = 0, 1

# (verdict on the original model, verdict on the unlearned model) -> membership class
TWO_ROUND_RULES: dict[tuple[int, int], int] = {
    (NON_MEMBER, NON_MEMBER): UNSEEN,
    (MEMBER, NON_MEMBER): FORGET,
    (MEMBER, MEMBER): RETAIN,
    (NON_MEMBER, MEMBER): UNSEEN,
}


@dataclass(frozen=True, slots=True, eq=False)
class BinaryMia:
    """Member/non-member classifier over the full posterior vector of one model."""

    model: ModelParams

    @property
    def num_classes(self) -> int:
        return self.model.input_dim

    def member_probability(self, probs: np.ndarray) -> np.ndarray:
        probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
        if probs.shape[1] != self.num_classes:
            raise ShapeError(f"binary MIA expects {self.num_classes}-way posteriors, got {probs.shape[1]}")
        return predict_proba(self.model, probs)[:, MEMBER]

    def predict_membership(self, probs: np.ndarray) -> np.ndarray:
        probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
        if probs.shape[1] != self.num_classes:
            raise ShapeError(f"binary MIA expects {self.num_classes}-way posteriors, got {probs.shape[1]}")
        return np.argmax(predict_proba(self.model, probs), axis=1)


def train_binary_mia(probs: np.ndarray, members: np.ndarray, cfg: TrainConfig | None = None) -> BinaryMia:
    """Fit a ``[C, 32, 16, 2]`` MIA on posterior rows labelled 1 (member) or 0."""

    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    members = np.asarray(members, dtype=np.int64)
    if members.shape != (probs.shape[0],):
        raise ShapeError(f"expected {probs.shape[0]} membership labels, got shape {members.shape}")
    counts = np.bincount(members, minlength=2)
    if counts.size != 2 or min(counts) == 0:
        raise DataError(f"binary MIA needs members and non-members, got counts {counts.tolist()}")
    cfg = cfg or attack_train_config()
    num_classes = probs.shape[1]
    params = init_model((num_classes, *ATTACK_TRAINING.hidden_sizes, 2), "relu", cfg.seed)
    data = Dataset(features=probs, labels=members, name="binary-mia", num_classes=2)
    return BinaryMia(model=train(params, data, cfg))


def _in_out(records: ShadowRecords, unlearned: bool) -> tuple[np.ndarray, np.ndarray]:
    # retain rows are members of both versions, unseen rows of neither
    mask = np.isin(records.membership, (RETAIN, UNSEEN))
    probs = (records.p_unlearn if unlearned else records.p_orig)[mask]
    return probs, (records.membership[mask] == RETAIN).astype(np.int64)


def train_version_mia(records: ShadowRecords, unlearned: bool, seed: int = 0) -> BinaryMia:
    """Shadow-trained MIA against the original (or unlearned) model version."""

    probs, members = _in_out(records, unlearned)
    stream = "mia-unlearned" if unlearned else "mia-original"
    return train_binary_mia(probs, members, attack_train_config(derive_seed(seed, stream)))


def train_two_round(records: ShadowRecords, seed: int = 0) -> tuple[BinaryMia, BinaryMia]:
    logger.info("Entrenando MIAs binarias de dos rondas con %d registros sombra", len(records))
    return train_version_mia(records, unlearned=False, seed=seed), train_version_mia(records, unlearned=True, seed=seed)


def mia_ensemble(records: ShadowRecords, size: int, seed: int = 0) -> list[BinaryMia]:
    """``size`` original-model MIAs, each trained on a bootstrap resample of the shadow records."""

    ensemble = []
    for member in range(size):
        rng = rng_for(seed, "mia-ensemble", member)
        sample = records.select(np.sort(rng.integers(0, len(records), size=len(records))))
        probs, members = _in_out(sample, unlearned=False)
        cfg = attack_train_config(derive_seed(seed, "mia-ensemble-init", member))
        ensemble.append(train_binary_mia(probs, members, cfg))
    return ensemble


def two_round_decision(first: int, second: int) -> int:
    """Combine the member verdicts on the original and unlearned model into a membership class."""

    try:
        return TWO_ROUND_RULES[(int(first), int(second))]
    except KeyError as exc:
        raise DataError(f"binary verdicts must be 0 or 1, got ({first}, {second})") from exc


def two_round_batch(
    mia_orig: BinaryMia,
    mia_unlearn: BinaryMia,
    p_orig: np.ndarray,
    p_unlearn: np.ndarray,
    true_labels: np.ndarray,
) -> np.ndarray:
    p_orig = np.atleast_2d(p_orig)
    labels = np.atleast_1d(np.asarray(true_labels, dtype=np.int64))
    if labels.shape != (p_orig.shape[0],):
        raise ShapeError(f"expected {p_orig.shape[0]} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= p_orig.shape[1]):
        raise DataError(f"true labels must lie in [0, {p_orig.shape[1]})")
    first = mia_orig.predict_membership(p_orig)
    second = mia_unlearn.predict_membership(np.atleast_2d(p_unlearn))
    return np.array([two_round_decision(a, b) for a, b in zip(first, second)], dtype=np.int64)


def two_round_attack(
    mia_orig: BinaryMia,
    mia_unlearn: BinaryMia,
    p_orig: np.ndarray,
    p_unlearn: np.ndarray,
    true_label: int,
) -> int:
    return int(two_round_batch(mia_orig, mia_unlearn, p_orig, p_unlearn, np.array([true_label]))[0])


def uleak_attack(records: ShadowRecords, cfg: TrainConfig | None = None) -> AttackClassifier:
    """Tri-class attack over concatenated full posteriors of both versions."""

    attack_set = attack_set_from_records(records, FeatureMode(kind=FeatureKind.CP))
    return train_attack(attack_set, cfg)


def retain_amplification(
    mia_orig: BinaryMia,
    mia_unlearn: BinaryMia,
    p_orig_retain: np.ndarray,
    p_unlearn_retain: np.ndarray,
) -> RetainAmplification:
    """Fraction of retain examples flagged as members before and after unlearning."""

    if np.shape(p_orig_retain)[0] == 0:
        raise DataError("retain amplification needs at least one retain example")
    pre = float(np.mean(mia_orig.predict_membership(p_orig_retain) == MEMBER))
    post = float(np.mean(mia_unlearn.predict_membership(p_unlearn_retain) == MEMBER))
    logger.info("Amplificación en retain: %.4f antes, %.4f después", pre, post)
    return RetainAmplification(pre=pre, post=post)
