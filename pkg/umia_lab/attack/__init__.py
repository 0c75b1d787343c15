"""Tri-class unlearning membership inference and its baselines."""

from .attack_set import (
    attack_set_from_records,
    build_attack_training_set,
    equal_triple,
    records_for_triple,
)
from .baselines import (
    BinaryMia,
    mia_ensemble,
    retain_amplification,
    train_binary_mia,
    train_two_round,
    train_version_mia,
    two_round_attack,
    two_round_batch,
    two_round_decision,
    uleak_attack,
)
from .classifier import AttackClassifier, attack_train_config, infer, infer_batch, train_attack
from .features import derive_feature_matrix, derive_features
from .ulira import (
    fit_gaussian,
    make_shadow_runner,
    phi,
    single_forget_split,
    ulira_attack,
    ulira_classify,
    ulira_classify_batch,
    ulira_log_densities,
    ulira_fit,
    ulira_observations,
)

__all__ = [
    "AttackClassifier",
    "BinaryMia",
    "attack_set_from_records",
    "attack_train_config",
    "build_attack_training_set",
    "derive_feature_matrix",
    "derive_features",
    "equal_triple",
    "fit_gaussian",
    "infer",
    "infer_batch",
    "make_shadow_runner",
    "mia_ensemble",
    "phi",
    "records_for_triple",
    "retain_amplification",
    "single_forget_split",
    "train_attack",
    "train_binary_mia",
    "train_two_round",
    "train_version_mia",
    "two_round_attack",
    "two_round_batch",
    "two_round_decision",
    "uleak_attack",
    "ulira_attack",
    "ulira_classify",
    "ulira_classify_batch",
    "ulira_log_densities",
    "ulira_fit",
    "ulira_observations",
]
