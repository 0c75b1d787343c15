"""Evaluation metrics."""

from .classification import confusion, micro_f1, overfitting_degree, per_class_f1, tpr_at_fpr, tpr_at_fpr_all
from .diagnostics import (
    MembershipPredictor,
    ScoreKind,
    entropy,
    kl_to_uniform,
    sample_scores,
    separability_report,
)

__all__ = [
    "MembershipPredictor",
    "ScoreKind",
    "confusion",
    "entropy",
    "kl_to_uniform",
    "micro_f1",
    "overfitting_degree",
    "per_class_f1",
    "sample_scores",
    "separability_report",
    "tpr_at_fpr",
    "tpr_at_fpr_all",
]
