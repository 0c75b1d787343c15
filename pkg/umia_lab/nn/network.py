"""Dense feed-forward network: initialisation, forward/backward passes and inference."""

from __future__ import annotations

from dataclasses import dataclass
from functools import singledispatch
import logging
from typing import Sequence

import numpy as np
from scipy.special import log_softmax, softmax

from umia_lab.core.errors import ConfigurationError, DataError, ShapeError, UndefinedMetricError
from umia_lab.core.seeding import rng_for
from umia_lab.models import Activation, Dataset, Gradients, ModelParams, SisaModel


logger = logging.getLogger(__name__)


def init_model(
    layer_sizes: Sequence[int],
    activation: Activation | str,
    seed: int,
    dropout_rates: Sequence[float] = (),
) -> ModelParams:
    """Xavier-uniform weights and zero biases drawn from a stream owned by ``seed``."""

    sizes = [int(size) for size in layer_sizes]
    if len(sizes) < 2 or any(size < 1 for size in sizes):
        raise ConfigurationError(f"layer_sizes needs >= 2 positive entries, got {list(layer_sizes)}")
    rng = rng_for(seed, "init")
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return ModelParams(
        layer_sizes=tuple(sizes),
        weights=tuple(weights),
        biases=tuple(biases),
        activation=Activation(activation),
        dropout_rates=tuple(dropout_rates),
    )


def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activation_grad(z: np.ndarray, a: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return (z > 0.0).astype(np.float64)
    return 1.0 - a * a


@dataclass(slots=True)
class ForwardCache:
    """Per-layer inputs, pre-activations and dropout masks of one forward pass."""

    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]
    masks: list[np.ndarray | None]


def as_batch(params: ModelParams, x: np.ndarray) -> np.ndarray:
    batch = np.asarray(x, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    if batch.ndim != 2 or batch.shape[1] != params.input_dim:
        raise ShapeError(f"expected inputs of width {params.input_dim}, got shape {np.shape(x)}")
    return batch


def _dropout_mask(shape: tuple[int, ...], rate: float, rng: np.random.Generator) -> np.ndarray:
    if rate >= 1.0:
        return np.zeros(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def forward_pass(
    params: ModelParams,
    x: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Logits for a batch plus the cache needed by :func:`backward_pass`."""

    activations = as_batch(params, x)
    use_dropout = train_mode and any(rate > 0.0 for rate in params.dropout_rates)
    if use_dropout and rng is None:
        raise ConfigurationError("training-mode dropout needs a seeded generator")
    cache = ForwardCache(inputs=[], pre_activations=[], masks=[])
    last = params.num_layers - 1
    for layer, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        cache.inputs.append(activations)
        z = activations @ weight.T + bias
        cache.pre_activations.append(z)
        if layer == last:
            cache.masks.append(None)
            return z, cache
        activations = _activate(z, params.activation)
        rate = params.dropout_rates[layer]
        if use_dropout and rate > 0.0:
            mask = _dropout_mask(activations.shape, rate, rng)
            activations = activations * mask
            cache.masks.append(mask)
        else:
            cache.masks.append(None)
    raise ShapeError("network has no layers")  # pragma: no cover


def backward_pass(params: ModelParams, cache: ForwardCache, dlogits: np.ndarray) -> Gradients:
    """Backpropagate ``dlogits`` (already scaled by the caller) through the cached pass."""

    grad_w: list[np.ndarray] = [np.empty(0)] * params.num_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * params.num_layers
    delta = dlogits
    for layer in range(params.num_layers - 1, -1, -1):
        grad_w[layer] = delta.T @ cache.inputs[layer]
        grad_b[layer] = delta.sum(axis=0)
        if layer == 0:
            break
        delta = delta @ params.weights[layer]
        mask = cache.masks[layer - 1]
        if mask is not None:
            delta = delta * mask
        z = cache.pre_activations[layer - 1]
        a = _activate(z, params.activation)
        delta = delta * _activation_grad(z, a, params.activation)
    return Gradients(weights=tuple(grad_w), biases=tuple(grad_b))


def _check_labels(params: ModelParams, labels: np.ndarray, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {np.shape(labels)}")
    if y.size and (y.min() < 0 or y.max() >= params.num_classes):
        raise DataError(f"labels must lie in [0, {params.num_classes})")
    return y


def _one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    encoded = np.zeros((labels.size, num_classes))
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def loss_and_gradients(
    params: ModelParams,
    x: np.ndarray,
    labels: np.ndarray,
    weight_decay: float = 0.0,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[float, Gradients]:
    """Mean cross-entropy over the batch and its gradient (L2 term on weights only)."""

    logits, cache = forward_pass(params, x, train_mode=train_mode, rng=rng)
    n = logits.shape[0]
    y = _check_labels(params, labels, n)
    log_probs = log_softmax(logits, axis=1)
    loss = float(-log_probs[np.arange(n), y].mean())
    dlogits = (np.exp(log_probs) - _one_hot(y, params.num_classes)) / n
    grads = backward_pass(params, cache, dlogits)
    if weight_decay > 0.0:
        loss += 0.5 * weight_decay * sum(float(np.sum(w * w)) for w in params.weights)
        grads = Gradients(
            weights=tuple(g + weight_decay * w for g, w in zip(grads.weights, params.weights)),
            biases=grads.biases,
        )
    return loss, grads


def cross_entropy(params: ModelParams, x: np.ndarray, labels: np.ndarray) -> float:
    """Mean inference-mode cross-entropy."""

    logits = raw_logits(params, x)
    y = _check_labels(params, labels, logits.shape[0])
    return float(-log_softmax(logits, axis=1)[np.arange(y.size), y].mean())


def per_example_gradient_arrays(
    params: ModelParams, x: np.ndarray, labels: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Stacked per-example gradients: ``(n, out, in)`` weights and ``(n, out)`` biases."""

    batch = as_batch(params, x)
    if batch.shape[0] == 0:
        raise DataError("per-example gradients need a non-empty batch")
    logits, cache = forward_pass(params, batch)
    y = _check_labels(params, labels, batch.shape[0])
    delta = softmax(logits, axis=1) - _one_hot(y, params.num_classes)
    grad_w: list[np.ndarray] = [np.empty(0)] * params.num_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * params.num_layers
    for layer in range(params.num_layers - 1, -1, -1):
        grad_w[layer] = np.einsum("ni,nj->nij", delta, cache.inputs[layer])
        grad_b[layer] = delta
        if layer == 0:
            break
        z = cache.pre_activations[layer - 1]
        a = _activate(z, params.activation)
        delta = (delta @ params.weights[layer]) * _activation_grad(z, a, params.activation)
    return grad_w, grad_b


def per_example_gradients(params: ModelParams, x: np.ndarray, labels: np.ndarray) -> list[Gradients]:
    """One full-parameter cross-entropy gradient per example (inference mode)."""

    grad_w, grad_b = per_example_gradient_arrays(params, x, labels)
    n = grad_b[0].shape[0]
    return [
        Gradients(
            weights=tuple(w[i] for w in grad_w),
            biases=tuple(b[i] for b in grad_b),
        )
        for i in range(n)
    ]


def raw_logits(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Pre-softmax outputs in inference mode; a vector input gives a vector back."""

    logits, _ = forward_pass(params, x)
    return logits[0] if np.ndim(x) == 1 else logits


def forward(
    params: ModelParams,
    x: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Softmax posteriors; dropout is applied only when ``train_mode`` is set."""

    logits, _ = forward_pass(params, x, train_mode=train_mode, rng=rng)
    probs = softmax(logits, axis=1)
    return probs[0] if np.ndim(x) == 1 else probs


@singledispatch
def predict_proba(model: object, x: np.ndarray) -> np.ndarray:
    """``(n, C)`` posteriors of any served model."""

    raise ConfigurationError(f"unsupported model type {type(model).__name__}")


@predict_proba.register
def _(model: ModelParams, x: np.ndarray) -> np.ndarray:
    return softmax(forward_pass(model, x)[0], axis=1)


@predict_proba.register
def _(model: SisaModel, x: np.ndarray) -> np.ndarray:
    # posterior mean over shards
    total = predict_proba(model.shard_models[0], x)
    for shard in model.shard_models[1:]:
        total = total + predict_proba(shard, x)
    return total / model.num_shards


def predict_labels(model: ModelParams | SisaModel, x: np.ndarray) -> np.ndarray:
    """Argmax labels; ``np.argmax`` keeps the lowest index on ties."""

    return np.argmax(predict_proba(model, x), axis=1)


def accuracy(model: ModelParams | SisaModel, features: np.ndarray, labels: np.ndarray) -> float:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if labels.size == 0:
        raise UndefinedMetricError("accuracy is undefined on an empty dataset")
    return float(np.mean(predict_labels(model, features) == labels))


def evaluate(model: ModelParams | SisaModel, data: Dataset) -> float:
    """Fraction of examples whose argmax posterior equals the true label."""

    return accuracy(model, data.features, data.labels)
