"""DP-SGD: Poisson-subsampled batches, per-example clipping and Gaussian noise."""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import rng_for
from umia_lab.models import ArchitectureSpec, Dataset, DpConfig, ModelParams, PrivacyLedger
from umia_lab.nn import check_compatible, init_model, mutable_arrays, per_example_gradient_arrays

from .accountant import compute_epsilon


logger = logging.getLogger(__name__)

StepHook = Callable[[int, np.ndarray], None]


def clip_factors(norms: np.ndarray, clip_norm: float) -> np.ndarray:
    """``min(1, C / ||g||)`` per example; zero-norm gradients are left alone."""

    safe = np.where(norms > 0.0, norms, 1.0)
    return np.minimum(1.0, clip_norm / safe)


def steps_per_epoch(n: int, batch_size: int) -> int:
    return max(1, round(n / batch_size))


def dp_sgd_train(
    data: Dataset,
    arch: ArchitectureSpec,
    dp: DpConfig,
    on_step: StepHook | None = None,
    ledger: PrivacyLedger | None = None,
    init: ModelParams | None = None,
) -> tuple[ModelParams, float]:
    """Train privately and return the parameters with the accountant's epsilon.

    ``on_step(step, clipped_norms)`` sees the per-example norms after clipping.
    """

    n = len(data)
    if dp.batch_size > n:
        raise ConfigurationError(f"batch size {dp.batch_size} exceeds dataset size {n}")
    params = init or init_model(
        arch.layer_sizes(data.dim, data.num_classes), arch.activation, dp.seed, dropout_rates=arch.dropout_rates
    )
    check_compatible(params, data)
    q = dp.batch_size / n
    total_steps = dp.epochs * steps_per_epoch(n, dp.batch_size)
    sample_rng = rng_for(dp.seed, "dp-sample")
    noise_rng = rng_for(dp.seed, "dp-noise")
    weights, biases = mutable_arrays(params)
    noise_std = dp.noise_multiplier * dp.clip_norm
    expected_batch = q * n
    per_epoch = steps_per_epoch(n, dp.batch_size)
    for step in range(total_steps):
        current = params.with_arrays(weights, biases)
        chosen = np.flatnonzero(sample_rng.random(n) < q)
        grad_w = [np.zeros_like(w) for w in weights]
        grad_b = [np.zeros_like(b) for b in biases]
        if chosen.size:
            per_w, per_b = per_example_gradient_arrays(current, data.features[chosen], data.labels[chosen])
            squared = sum(np.square(g.reshape(chosen.size, -1)).sum(axis=1) for g in per_w + per_b)
            factors = clip_factors(np.sqrt(squared), dp.clip_norm)
            if on_step is not None:
                on_step(step, np.sqrt(squared) * factors)
            grad_w = [np.einsum("n,nij->ij", factors, g) for g in per_w]
            grad_b = [np.einsum("n,ni->i", factors, g) for g in per_b]
        elif on_step is not None:
            on_step(step, np.empty(0))
        for i in range(len(weights)):
            noisy_w = (grad_w[i] + noise_rng.normal(0.0, noise_std, size=weights[i].shape)) / expected_batch
            noisy_b = (grad_b[i] + noise_rng.normal(0.0, noise_std, size=biases[i].shape)) / expected_batch
            weights[i] -= dp.learning_rate * noisy_w
            biases[i] -= dp.learning_rate * noisy_b
        if ledger is not None:
            ledger.record_step(q, dp.noise_multiplier)
            if (step + 1) % per_epoch == 0 or step + 1 == total_steps:
                ledger.record_checkpoint(step + 1, _epsilon(dp, step + 1, q))
    epsilon = _epsilon(dp, total_steps, q) if total_steps else 0.0
    logger.info(
        "DP-SGD: %d pasos, q=%.4f, sigma=%.4f, epsilon=%.4f (delta=%g)",
        total_steps,
        q,
        dp.noise_multiplier,
        epsilon,
        dp.target_delta,
    )
    return params.with_arrays(weights, biases), epsilon


def _epsilon(dp: DpConfig, steps: int, q: float) -> float:
    if dp.noise_multiplier == 0:
        logger.warning("DP-SGD sin ruido (sigma=0): no hay garantía de privacidad, epsilon infinito")
        return math.inf
    return compute_epsilon(dp.noise_multiplier, steps, q, dp.target_delta)
