"""Blob datasets, target/shadow partitioning and membership splits."""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from umia_lab.core.config import NUMERIC
from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import rng_for
from umia_lab.models import Dataset, EvaluationTriple, MembershipSplit


logger = logging.getLogger(__name__)


def ceil_count(fraction: float, total: int) -> int:
    """``ceil(fraction * total)`` with a minimum of 1, tolerant of float noise."""

    return max(1, math.ceil(fraction * total - NUMERIC.ratio_tolerance))


def floor_count(fraction: float, total: int) -> int:
    return max(1, math.floor(fraction * total + NUMERIC.ratio_tolerance))


def generate_blobs(
    classes: int,
    dim: int,
    per_class: int,
    spread: float,
    seed: int,
    radius: float = 1.0,
    name: str = "blobs",
) -> Dataset:
    """Isotropic Gaussian clusters whose means lie on a sphere of ``radius``.

    Rows are class-major: all of class 0, then class 1, and so on.
    """

    if classes < 2 or per_class < 2 or dim < 1:
        raise ConfigurationError(f"need classes >= 2, per_class >= 2, dim >= 1 (got {classes}, {per_class}, {dim})")
    if spread < 0 or radius <= 0:
        raise ConfigurationError(f"spread must be >= 0 and radius > 0 (got {spread}, {radius})")
    mean_rng = rng_for(seed, "blob-means")
    noise_rng = rng_for(seed, "blob-noise")
    directions = mean_rng.standard_normal((classes, dim))
    means = radius * directions / np.linalg.norm(directions, axis=1, keepdims=True)
    labels = np.repeat(np.arange(classes, dtype=np.int64), per_class)
    features = means[labels] + spread * noise_rng.standard_normal((classes * per_class, dim))
    logger.debug("Generadas %d muestras en %d clases (d=%d, spread=%.3f)", labels.size, classes, dim, spread)
    return Dataset(features=features, labels=labels, name=name, seed_of_origin=seed, num_classes=classes)


def split_target_shadow(data: Dataset, target_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint uniform partition; the target gets ``floor(fraction * N)`` rows (at least 1)."""

    if not 0.0 < target_fraction < 1.0:
        raise ConfigurationError(f"target_fraction must lie in (0, 1), got {target_fraction}")
    n = len(data)
    if n < 2:
        raise ConfigurationError("need at least two examples to split target and shadow data")
    n_target = min(floor_count(target_fraction, n), n - 1)
    order = rng_for(seed, "target-shadow").permutation(n)
    target_idx = np.sort(order[:n_target])
    shadow_idx = np.sort(order[n_target:])
    return data.subset(target_idx, name="target"), data.subset(shadow_idx, name="shadow")


def make_membership_split(data: Dataset, train_fraction: float, forget_fraction: float, seed: int) -> MembershipSplit:
    """Train/test framing plus a uniformly sampled forget set; the whole test set is the unseen pool."""

    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if not 0.0 < forget_fraction <= 1.0:
        raise ConfigurationError(f"forget_fraction must lie in (0, 1], got {forget_fraction}")
    n = len(data)
    n_train = ceil_count(train_fraction, n)
    if n_train >= n:
        raise ConfigurationError(f"train_fraction {train_fraction} leaves no test examples out of {n}")
    n_forget = ceil_count(forget_fraction, n_train)
    if n_forget >= n_train:
        raise ConfigurationError(
            f"forget_fraction {forget_fraction} leaves an empty retain set ({n_forget} of {n_train})"
        )
    order = rng_for(seed, "train-test").permutation(n)
    train = np.sort(order[:n_train])
    test = np.sort(order[n_train:])
    forget = rng_for(seed, "forget").choice(train, size=n_forget, replace=False)
    return MembershipSplit(
        train=train,
        test=test,
        forget=forget,
        retain=np.setdiff1d(train, forget),
        unseen=test,
    )


def balance_ratio_sample(split: MembershipSplit, ratio: Sequence[int], seed: int) -> EvaluationTriple:
    """Subsample unseen/forget/retain at ``ratio`` (in that order), using the largest feasible unit."""

    if len(ratio) != 3:
        raise ConfigurationError(f"ratio needs three entries (unseen, forget, retain), got {ratio}")
    r_unseen, r_forget, r_retain = (int(r) for r in ratio)
    if min(r_unseen, r_forget, r_retain) <= 0:
        raise ConfigurationError(f"ratio entries must be positive, got {tuple(ratio)}")
    unit = min(split.unseen.size // r_unseen, split.forget.size // r_forget, split.retain.size // r_retain)
    if unit == 0:
        raise ConfigurationError(
            f"ratio {tuple(ratio)} is not achievable with pool sizes "
            f"{(split.unseen.size, split.forget.size, split.retain.size)}"
        )
    rng = rng_for(seed, "ratio-sample")
    return EvaluationTriple(
        unseen=rng.choice(split.unseen, size=r_unseen * unit, replace=False),
        forget=rng.choice(split.forget, size=r_forget * unit, replace=False),
        retain=rng.choice(split.retain, size=r_retain * unit, replace=False),
    )


def inject_outliers(
    data: Dataset,
    split: MembershipSplit,
    fraction: float,
    seed: int,
    variance: float = 5.0,
) -> tuple[Dataset, MembershipSplit]:
    """Add zero-mean Gaussian noise to a random slice of the training set and make it the forget set."""

    if not 0.0 < fraction < 1.0:
        raise ConfigurationError(f"outlier fraction must lie in (0, 1), got {fraction}")
    if variance < 0:
        raise ConfigurationError(f"variance must be >= 0, got {variance}")
    count = ceil_count(fraction, split.train.size)
    if count >= split.train.size:
        raise ConfigurationError("outlier injection would leave an empty retain set")
    rng = rng_for(seed, "outliers")
    chosen = np.sort(rng.choice(split.train, size=count, replace=False))
    features = data.features.copy()
    features[chosen] += np.sqrt(variance) * rng.standard_normal((count, data.dim))
    corrupted = Dataset(
        features=features,
        labels=data.labels,
        name=f"{data.name}+outliers",
        seed_of_origin=data.seed_of_origin,
        num_classes=data.num_classes,
    )
    logger.info("Inyectados %d outliers (varianza %.1f) en '%s'", count, variance, data.name)
    return corrupted, split.with_forget(chosen)
