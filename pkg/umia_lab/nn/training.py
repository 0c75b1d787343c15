"""Seeded minibatch cross-entropy training."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from umia_lab.core.errors import DataError, ShapeError
from umia_lab.core.seeding import rng_for
from umia_lab.models import Dataset, Gradients, ModelParams, TrainConfig

from .network import loss_and_gradients
from .optim import make_optimizer, mutable_arrays


logger = logging.getLogger(__name__)


def check_compatible(params: ModelParams, data: Dataset) -> None:
    if data.dim != params.input_dim:
        raise ShapeError(f"data width {data.dim} does not match model input {params.input_dim}")
    if int(data.labels.max()) >= params.num_classes:
        raise DataError(
            f"label {int(data.labels.max())} out of range for a {params.num_classes}-class model"
        )


def _masked(grads: Gradients, masks: Sequence[np.ndarray]) -> Gradients:
    return Gradients(weights=tuple(g * m for g, m in zip(grads.weights, masks)), biases=grads.biases)


def train(
    params: ModelParams,
    data: Dataset,
    cfg: TrainConfig,
    weight_masks: Sequence[np.ndarray] | None = None,
) -> ModelParams:
    """Run ``cfg.epochs`` of shuffled minibatch optimisation and return new parameters.

    Shuffling and dropout draw from separate streams derived from ``cfg.seed``,
    so the result depends only on the inputs. ``weight_masks`` (0/1 per weight)
    pins masked-out weights at exactly zero throughout.
    """

    check_compatible(params, data)
    if cfg.epochs == 0:
        return params
    shuffle_rng = rng_for(cfg.seed, "shuffle")
    dropout_rng = rng_for(cfg.seed, "dropout")
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)
    weights, biases = mutable_arrays(params)
    masks = [np.asarray(m, dtype=np.float64) for m in weight_masks] if weight_masks is not None else None
    if masks is not None:
        for w, m in zip(weights, masks):
            w *= m
    n = len(data)
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            current = params.with_arrays(weights, biases)
            loss, grads = loss_and_gradients(
                current,
                data.features[batch],
                data.labels[batch],
                weight_decay=cfg.weight_decay,
                train_mode=True,
                rng=dropout_rng,
            )
            if masks is not None:
                grads = _masked(grads, masks)
            optimizer.step(weights, biases, grads)
            if masks is not None:
                for w, m in zip(weights, masks):
                    w *= m
            epoch_loss += loss * batch.size
        logger.debug("Época %d/%d de '%s': pérdida media %.6f", epoch + 1, cfg.epochs, data.name, epoch_loss / n)
    return params.with_arrays(weights, biases)
