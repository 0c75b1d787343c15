"""Approximate unlearning by full-batch gradient ascent on the forget set."""

from __future__ import annotations

import logging

import numpy as np

from umia_lab.core.errors import ConfigurationError, DataError
from umia_lab.models import Dataset, ModelParams
from umia_lab.nn import cross_entropy, loss_and_gradients, mutable_arrays


logger = logging.getLogger(__name__)


def gradient_ascent_unlearn(
    params: ModelParams,
    data: Dataset,
    forget: np.ndarray,
    steps: int,
    lr: float,
) -> ModelParams:
    """``steps`` updates of ``theta <- theta + lr * grad L(theta; forget)``."""

    if steps < 0:
        raise ConfigurationError(f"steps must be >= 0, got {steps}")
    if not lr > 0:
        raise ConfigurationError(f"lr must be positive, got {lr}")
    forget = np.asarray(forget, dtype=np.int64)
    if forget.size == 0:
        raise DataError("gradient ascent needs a non-empty forget set")
    if steps == 0:
        return params
    x, y = data.features[forget], data.labels[forget]
    weights, biases = mutable_arrays(params)
    current = params
    for _ in range(steps):
        _, grads = loss_and_gradients(current, x, y)
        for w, g in zip(weights, grads.weights):
            w += lr * g
        for b, g in zip(biases, grads.biases):
            b += lr * g
        current = params.with_arrays(weights, biases)
    logger.debug(
        "Ascenso de gradiente: pérdida en olvido %.4f -> %.4f",
        cross_entropy(params, x, y),
        cross_entropy(current, x, y),
    )
    return current
