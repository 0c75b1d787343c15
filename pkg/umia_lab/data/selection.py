"""Forget-set selection by removed-sample characteristics."""

from __future__ import annotations

from enum import Enum
import logging
from typing import Sequence

import numpy as np

from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import rng_for
from umia_lab.metrics import MembershipPredictor, ScoreKind, sample_scores
from umia_lab.models import Dataset, MembershipSplit, ModelParams, SisaModel

from .generation import ceil_count


logger = logging.getLogger(__name__)


class ForgetStrategy(str, Enum):
    RANDOM = "random"
    HIGH_ENTROPY = "high_entropy"
    LOW_ENTROPY = "low_entropy"
    HIGH_VULNERABILITY = "high_vulnerability"
    LOW_VULNERABILITY = "low_vulnerability"
    OUTLIER = "outlier"


# strategy -> (score kind, rank highest first)
_RANKINGS: dict[ForgetStrategy, tuple[ScoreKind, bool]] = {
    ForgetStrategy.HIGH_ENTROPY: (ScoreKind.ENTROPY, True),
    ForgetStrategy.LOW_ENTROPY: (ScoreKind.ENTROPY, False),
    ForgetStrategy.HIGH_VULNERABILITY: (ScoreKind.VULNERABILITY, True),
    ForgetStrategy.LOW_VULNERABILITY: (ScoreKind.VULNERABILITY, False),
    ForgetStrategy.OUTLIER: (ScoreKind.OUTLIERNESS, False),
}


def rank_indices(scores: np.ndarray, descending: bool) -> np.ndarray:
    """Positions sorted by score; equal scores keep ascending position order."""

    scores = np.asarray(scores, dtype=np.float64)
    return np.argsort(-scores if descending else scores, kind="stable")


def select_forget(
    strategy: ForgetStrategy | str,
    data: Dataset,
    split: MembershipSplit,
    model: ModelParams | SisaModel | None,
    fraction: float,
    seed: int,
    vulnerability: Sequence[MembershipPredictor] | None = None,
) -> MembershipSplit:
    """Replace the forget set of ``split`` with ``ceil(fraction * |train|)`` chosen training examples.

    Ranked strategies score the training examples under ``model`` (the
    original model); vulnerability ranking also needs the MIA ensemble.
    """

    try:
        strategy = ForgetStrategy(strategy)
    except ValueError as exc:
        raise ConfigurationError(f"unknown forget strategy '{strategy}'") from exc
    if not 0.0 < fraction < 1.0:
        raise ConfigurationError(f"forget fraction must lie in (0, 1), got {fraction}")
    count = ceil_count(fraction, split.train.size)
    if count >= split.train.size:
        raise ConfigurationError(f"selecting {count} of {split.train.size} examples leaves an empty retain set")

    if strategy is ForgetStrategy.RANDOM:
        chosen = rng_for(seed, "forget").choice(split.train, size=count, replace=False)
        return split.with_forget(chosen)

    if model is None:
        raise ConfigurationError(f"strategy '{strategy.value}' needs the original model to score examples")
    kind, descending = _RANKINGS[strategy]
    scores = sample_scores(model, data.subset(split.train), kind, mia_ensemble=vulnerability)
    chosen = split.train[rank_indices(scores, descending)[:count]]
    logger.info(
        "Selección '%s': %d ejemplos, puntuación en [%.4f, %.4f]",
        strategy.value,
        count,
        float(scores.min()),
        float(scores.max()),
    )
    return split.with_forget(chosen)
