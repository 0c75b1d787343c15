"""Defenses: output policies, dropout and DP-SGD with RDP accounting."""

from .accountant import calibrate_sigma, compute_epsilon, rdp_accountant
from .dp_sgd import clip_factors, dp_sgd_train, steps_per_epoch
from .dropout import dropout_defense
from .output import apply_output_policy, label_only_mode

__all__ = [
    "apply_output_policy",
    "calibrate_sigma",
    "clip_factors",
    "compute_epsilon",
    "dp_sgd_train",
    "dropout_defense",
    "label_only_mode",
    "rdp_accountant",
    "steps_per_epoch",
]
