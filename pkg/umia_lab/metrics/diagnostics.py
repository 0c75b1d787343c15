"""Separability diagnostics and per-example characteristic scores."""

from __future__ import annotations

from enum import Enum
from typing import Protocol, Sequence

import numpy as np
from scipy.special import entr

from umia_lab.core.errors import ConfigurationError, DataError
from umia_lab.models import Dataset, MembershipSplit, ModelParams, SeparabilityBlock, SeparabilityReport, SisaModel
from umia_lab.nn import accuracy, predict_proba


class ScoreKind(str, Enum):
    ENTROPY = "entropy"
    VULNERABILITY = "vulnerability"
    OUTLIERNESS = "outlierness"


class MembershipPredictor(Protocol):
    def predict_membership(self, probs: np.ndarray) -> np.ndarray:
        """0 for non-member, 1 for member, one verdict per posterior row."""


def entropy(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy in nats per row; ``0 * ln 0`` counts as 0."""

    return entr(np.asarray(probs, dtype=np.float64)).sum(axis=-1)


def kl_to_uniform(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    return np.log(probs.shape[-1]) - entropy(probs)


def sample_scores(
    model: ModelParams | SisaModel,
    data: Dataset,
    kind: ScoreKind | str,
    mia_ensemble: Sequence[MembershipPredictor] | None = None,
    membership: np.ndarray | None = None,
) -> np.ndarray:
    """One score per example of ``data``.

    ``entropy`` is the posterior entropy, ``outlierness`` the KL divergence
    from uniform (lower means more outlier-like) and ``vulnerability`` the
    fraction of ensemble attacks that get the example's membership right.
    ``membership`` defaults to all-members.
    """

    try:
        kind = ScoreKind(kind)
    except ValueError as exc:
        raise ConfigurationError(f"unknown score kind '{kind}'") from exc
    probs = predict_proba(model, data.features)
    if kind is ScoreKind.ENTROPY:
        return entropy(probs)
    if kind is ScoreKind.OUTLIERNESS:
        return kl_to_uniform(probs)
    if mia_ensemble is None or len(mia_ensemble) < 2:
        raise ConfigurationError("vulnerability scores need an ensemble of at least two attacks")
    truth = np.ones(len(data), dtype=np.int64) if membership is None else np.asarray(membership, dtype=np.int64)
    correct = np.zeros(len(data))
    for attack in mia_ensemble:
        correct += attack.predict_membership(probs) == truth
    return correct / len(mia_ensemble)


def _block(model: ModelParams | SisaModel, data: Dataset, split: MembershipSplit) -> SeparabilityBlock:
    accs = {}
    means = {}
    for name in ("retain", "forget", "unseen"):
        idx = getattr(split, name)
        if idx.size == 0:
            raise DataError(f"separability needs a non-empty {name} set")
        accs[name] = accuracy(model, data.features[idx], data.labels[idx])
        means[name] = predict_proba(model, data.features[idx]).mean(axis=0)
    return SeparabilityBlock(
        acc_retain=accs["retain"],
        acc_forget=accs["forget"],
        acc_unseen=accs["unseen"],
        acc_gap_retain_unseen=accs["retain"] - accs["unseen"],
        acc_gap_retain_forget=accs["retain"] - accs["forget"],
        dist_retain_unseen=float(np.linalg.norm(means["retain"] - means["unseen"])),
        dist_retain_forget=float(np.linalg.norm(means["retain"] - means["forget"])),
    )


def separability_report(
    original: ModelParams | SisaModel,
    unlearned: ModelParams | SisaModel,
    split: MembershipSplit,
    data: Dataset,
) -> SeparabilityReport:
    """Accuracy gaps and mean-posterior distances of retain vs forget/unseen, before and after."""

    return SeparabilityReport(pre=_block(original, data, split), post=_block(unlearned, data, split))
