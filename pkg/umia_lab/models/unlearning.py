"""Unlearning configuration and the sharded SISA ensemble."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from umia_lab.core.config import UNLEARNING
from umia_lab.core.errors import ConfigurationError

from .network import ModelParams, TrainConfig


class UnlearnMethod(str, Enum):
    RETRAIN = "retrain"
    SISA = "sisa"
    GA = "ga"
    SPARSITY = "sparsity"
    SCRUB = "scrub"


@dataclass(frozen=True, slots=True)
class UnlearnConfig:
    method: UnlearnMethod = UnlearnMethod.RETRAIN
    ga_steps: int = UNLEARNING.ga_steps
    ga_lr: float = UNLEARNING.ga_lr
    prune_ratio: float = UNLEARNING.prune_ratio
    finetune_epochs: int = UNLEARNING.finetune_epochs
    scrub_max_epochs: int = UNLEARNING.scrub_max_epochs
    scrub_min_epochs: int = UNLEARNING.scrub_min_epochs
    scrub_temperature: float = UNLEARNING.scrub_temperature
    scrub_lr: float = UNLEARNING.scrub_lr
    num_shards: int = UNLEARNING.num_shards

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", UnlearnMethod(self.method))
        if self.ga_steps < 0 or not self.ga_lr > 0:
            raise ConfigurationError(f"invalid GA settings steps={self.ga_steps} lr={self.ga_lr}")
        if not 0.0 <= self.prune_ratio <= 1.0:
            raise ConfigurationError(f"prune_ratio must lie in [0, 1], got {self.prune_ratio}")
        if self.finetune_epochs < 0:
            raise ConfigurationError(f"finetune_epochs must be >= 0, got {self.finetune_epochs}")
        if self.scrub_max_epochs < 0 or self.scrub_min_epochs < 0:
            raise ConfigurationError("SCRUB epoch counts must be >= 0")
        if not self.scrub_temperature > 0 or not self.scrub_lr > 0:
            raise ConfigurationError("SCRUB temperature and learning rate must be positive")
        if self.num_shards < 1:
            raise ConfigurationError(f"num_shards must be >= 1, got {self.num_shards}")


@dataclass(frozen=True, slots=True, eq=False)
class SisaModel:
    """Shard ensemble; ``shard_assignment`` maps dataset index to shard id."""

    shard_assignment: dict[int, int]
    shard_models: tuple[ModelParams, ...]
    num_shards: int
    train_cfg: TrainConfig

    def __post_init__(self) -> None:
        if len(self.shard_models) != self.num_shards:
            raise ConfigurationError(
                f"SISA ensemble has {len(self.shard_models)} models for {self.num_shards} shards"
            )
        if any(not 0 <= shard < self.num_shards for shard in self.shard_assignment.values()):
            raise ConfigurationError("shard assignment references an unknown shard")

    def shard_members(self, shard_id: int) -> np.ndarray:
        """Indices of one shard in ascending order (the order shards train in)."""

        return np.array(
            sorted(idx for idx, shard in self.shard_assignment.items() if shard == shard_id),
            dtype=np.int64,
        )

    @property
    def num_classes(self) -> int:
        return self.shard_models[0].num_classes

    def identical_to(self, other: SisaModel) -> bool:
        return (
            self.num_shards == other.num_shards
            and self.shard_assignment == other.shard_assignment
            and all(a.identical_to(b) for a, b in zip(self.shard_models, other.shard_models))
        )
