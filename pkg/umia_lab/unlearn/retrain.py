"""Exact unlearning by retraining from scratch on the retain set."""

from __future__ import annotations

import logging

from umia_lab.core.errors import DataError
from umia_lab.models import ArchitectureSpec, Dataset, MembershipSplit, ModelParams, TrainConfig
from umia_lab.nn import init_model, train


logger = logging.getLogger(__name__)


def fresh_model(arch: ArchitectureSpec, data: Dataset, seed: int) -> ModelParams:
    return init_model(
        arch.layer_sizes(data.dim, data.num_classes),
        arch.activation,
        seed,
        dropout_rates=arch.dropout_rates,
    )


def train_original(split: MembershipSplit, data: Dataset, cfg: TrainConfig, arch: ArchitectureSpec) -> ModelParams:
    """The model before unlearning: trained on the whole training set."""

    return train(fresh_model(arch, data, cfg.seed), data.subset(split.train, name=f"{data.name}/train"), cfg)


def retrain(
    split: MembershipSplit,
    data: Dataset,
    cfg: TrainConfig,
    arch: ArchitectureSpec | None = None,
) -> ModelParams:
    if split.retain.size == 0:
        raise DataError("retraining needs a non-empty retain set")
    arch = arch or ArchitectureSpec()
    logger.info("Reentrenando desde cero sobre %d muestras retenidas", split.retain.size)
    return train(fresh_model(arch, data, cfg.seed), data.subset(split.retain, name=f"{data.name}/retain"), cfg)
