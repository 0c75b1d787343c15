"""Result records written by the harness."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from umia_lab.core.config import ENCODING_LEGEND
from umia_lab.core.errors import DataError


@dataclass(frozen=True, slots=True, eq=False)
class ConfusionMatrix:
    """3 x 3 counts; rows are the true membership set, columns the prediction."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.shape != (3, 3) or (counts < 0).any():
            raise DataError(f"confusion counts must be a non-negative 3x3 matrix, got {counts.shape}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    def to_list(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.counts]


@dataclass(frozen=True, slots=True)
class ModelUtility:
    """Accuracies of the original model (train/test) and the unlearned model (UA/RA/TA)."""

    train_acc: float
    test_acc: float
    unlearn_acc: float
    retain_acc: float
    test_acc_unlearned: float


@dataclass(frozen=True, slots=True)
class SeparabilityBlock:
    acc_retain: float
    acc_forget: float
    acc_unseen: float
    acc_gap_retain_unseen: float
    acc_gap_retain_forget: float
    dist_retain_unseen: float
    dist_retain_forget: float


@dataclass(frozen=True, slots=True)
class SeparabilityReport:
    pre: SeparabilityBlock
    post: SeparabilityBlock


@dataclass(frozen=True, slots=True)
class RetainAmplification:
    """Binary-MIA accuracy on the retain set against each model version."""

    pre: float
    post: float


@dataclass(slots=True)
class ExperimentReport:
    name: str
    seed: int
    config_digest: str
    method: str
    feature_mode: str
    defense: str
    micro_f1: float
    per_class_f1: tuple[float, float, float]
    tpr_at_fpr: tuple[float, float, float]
    confusion: ConfusionMatrix
    model_utility: ModelUtility
    overfitting: dict[str, float] = field(default_factory=dict)
    separability: SeparabilityReport | None = None
    retain_mia: RetainAmplification | None = None
    baselines: dict[str, float] = field(default_factory=dict)
    attack_train_size: int = 0
    attack_train_fraction: float = 0.0
    evaluation_sizes: tuple[int, int, int] = (0, 0, 0)
    epsilon: float | None = None

    @property
    def macro_f1(self) -> float:
        return float(sum(self.per_class_f1) / 3.0)

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "name": self.name,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "encoding": {str(k): v for k, v in ENCODING_LEGEND.items()},
            "method": self.method,
            "feature_mode": self.feature_mode,
            "defense": self.defense,
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "per_class_f1": list(self.per_class_f1),
            "tpr_at_fpr": list(self.tpr_at_fpr),
            "confusion": self.confusion.to_list(),
            "model_utility": asdict(self.model_utility),
            "overfitting": dict(self.overfitting),
            "separability": asdict(self.separability) if self.separability else None,
            "retain_mia": asdict(self.retain_mia) if self.retain_mia else None,
            "baselines": dict(self.baselines),
            "attack_train_size": self.attack_train_size,
            "attack_train_fraction": self.attack_train_fraction,
            "evaluation_sizes": list(self.evaluation_sizes),
            "epsilon": self.epsilon,
        }
        return payload


@dataclass(frozen=True, slots=True)
class GameResult:
    trials: int
    successes: int
    per_class_accuracy: tuple[float, float, float]
    per_class_trials: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self) -> None:
        if not 0 <= self.successes <= self.trials:
            raise DataError(f"successes {self.successes} outside [0, {self.trials}]")

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "per_class_accuracy": list(self.per_class_accuracy),
            "per_class_trials": list(self.per_class_trials),
        }
