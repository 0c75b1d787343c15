"""Deterministic dense-network engine."""

from .checkpoint import load_checkpoint, params_from_bytes, params_to_bytes, save_checkpoint
from .network import (
    accuracy,
    as_batch,
    backward_pass,
    cross_entropy,
    evaluate,
    forward,
    forward_pass,
    init_model,
    loss_and_gradients,
    per_example_gradient_arrays,
    per_example_gradients,
    predict_labels,
    predict_proba,
    raw_logits,
)
from .optim import Adam, Sgd, make_optimizer, mutable_arrays
from .training import check_compatible, train

__all__ = [
    "Adam",
    "Sgd",
    "accuracy",
    "as_batch",
    "backward_pass",
    "check_compatible",
    "cross_entropy",
    "evaluate",
    "forward",
    "forward_pass",
    "init_model",
    "load_checkpoint",
    "loss_and_gradients",
    "make_optimizer",
    "mutable_arrays",
    "params_from_bytes",
    "params_to_bytes",
    "per_example_gradient_arrays",
    "per_example_gradients",
    "predict_labels",
    "predict_proba",
    "raw_logits",
    "save_checkpoint",
    "train",
]
