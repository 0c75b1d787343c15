"""Global magnitude pruning followed by masked fine-tuning on the retain set."""

from __future__ import annotations

import logging
import math

import numpy as np

from umia_lab.core.errors import ConfigurationError
from umia_lab.models import Dataset, MembershipSplit, ModelParams, TrainConfig
from umia_lab.nn import train


logger = logging.getLogger(__name__)


def prune_masks(params: ModelParams, prune_ratio: float) -> list[np.ndarray]:
    """0/1 masks zeroing the ``floor(ratio * W)`` smallest-magnitude weights.

    Ties are broken by flat index (layer order, then row-major); biases are never pruned.
    """

    if not 0.0 <= prune_ratio <= 1.0:
        raise ConfigurationError(f"prune_ratio must lie in [0, 1], got {prune_ratio}")
    flat = params.flat_weights()
    count = math.floor(prune_ratio * flat.size)
    keep = np.ones(flat.size)
    keep[np.argsort(np.abs(flat), kind="stable")[:count]] = 0.0
    masks = []
    offset = 0
    for weight in params.weights:
        masks.append(keep[offset : offset + weight.size].reshape(weight.shape))
        offset += weight.size
    return masks


def sparsity_unlearn(
    params: ModelParams,
    data: Dataset,
    split: MembershipSplit,
    prune_ratio: float,
    finetune_epochs: int,
    cfg: TrainConfig,
) -> ModelParams:
    if finetune_epochs < 0:
        raise ConfigurationError(f"finetune_epochs must be >= 0, got {finetune_epochs}")
    masks = prune_masks(params, prune_ratio)
    pruned = params.with_arrays([w * m for w, m in zip(params.weights, masks)], params.biases)
    logger.info(
        "Poda global: %d de %d pesos a cero, %d épocas de ajuste",
        int(sum((m == 0).sum() for m in masks)),
        params.num_weights,
        finetune_epochs,
    )
    if finetune_epochs == 0:
        return pruned
    finetune_cfg = TrainConfig(
        epochs=finetune_epochs,
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        optimizer=cfg.optimizer,
        seed=cfg.seed,
    )
    return train(pruned, data.subset(split.retain, name=f"{data.name}/retain"), finetune_cfg, weight_masks=masks)
