"""Data models shared across the lab."""

from .attack import (
    AttackDataset,
    AttackExample,
    FeatureKind,
    FeatureMode,
    GaussianFit,
    OutputKind,
    OutputPolicy,
    ShadowRecords,
    UliraFit,
)
from .dataset import Dataset, EvaluationTriple, MembershipSplit
from .network import Activation, ArchitectureSpec, Gradients, ModelParams, Optimizer, TrainConfig
from .privacy import DefenseKind, DefenseSpec, DpConfig, PrivacyLedger
from .reports import (
    ConfusionMatrix,
    ExperimentReport,
    GameResult,
    ModelUtility,
    RetainAmplification,
    SeparabilityBlock,
    SeparabilityReport,
)
from .unlearning import SisaModel, UnlearnConfig, UnlearnMethod

__all__ = [
    "Activation",
    "ArchitectureSpec",
    "AttackDataset",
    "AttackExample",
    "ConfusionMatrix",
    "Dataset",
    "DefenseKind",
    "DefenseSpec",
    "DpConfig",
    "EvaluationTriple",
    "ExperimentReport",
    "FeatureKind",
    "FeatureMode",
    "GameResult",
    "GaussianFit",
    "Gradients",
    "MembershipSplit",
    "ModelParams",
    "ModelUtility",
    "Optimizer",
    "OutputKind",
    "OutputPolicy",
    "PrivacyLedger",
    "RetainAmplification",
    "SeparabilityBlock",
    "SeparabilityReport",
    "ShadowRecords",
    "SisaModel",
    "TrainConfig",
    "UliraFit",
    "UnlearnConfig",
    "UnlearnMethod",
]
