"""Core utilities for umia_lab."""

from __future__ import annotations

from .config import (
    APP_NAME,
    ATTACK_TRAINING,
    DESK_DATASET,
    ENCODING_HEADER,
    ENCODING_LEGEND,
    FORGET,
    NUMERIC,
    OUTPUT,
    OVERFIT_PRESETS,
    PRIVACY,
    RETAIN,
    TRAINING,
    UNLEARNING,
    UNSEEN,
)
from .errors import (
    ConfigurationError,
    DataError,
    LabError,
    ShapeError,
    StageError,
    UndefinedMetricError,
)
from .seeding import check_seed, derive_seed, rng_for

__all__ = [
    "APP_NAME",
    "ATTACK_TRAINING",
    "DESK_DATASET",
    "ENCODING_HEADER",
    "ENCODING_LEGEND",
    "FORGET",
    "NUMERIC",
    "OUTPUT",
    "OVERFIT_PRESETS",
    "PRIVACY",
    "RETAIN",
    "TRAINING",
    "UNLEARNING",
    "UNSEEN",
    "ConfigurationError",
    "DataError",
    "LabError",
    "ShapeError",
    "StageError",
    "UndefinedMetricError",
    "check_seed",
    "derive_seed",
    "rng_for",
]
