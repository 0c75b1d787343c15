"""Labeled datasets and the forget/retain/unseen membership partition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from umia_lab.core.config import FORGET, RETAIN, UNSEEN
from umia_lab.core.errors import ConfigurationError, DataError


def _index_array(indices: Sequence[int] | np.ndarray) -> np.ndarray:
    array = np.unique(np.asarray(indices, dtype=np.int64))
    array.setflags(write=False)
    return array


@dataclass(frozen=True, slots=True, eq=False)
class Dataset:
    """Feature matrix plus integer labels in ``[0, num_classes)``."""

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    seed_of_origin: int = 0
    num_classes: int = 0

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64, copy=True)
        labels = np.array(self.labels, copy=True)
        if features.ndim != 2 or features.shape[0] < 1:
            raise DataError(f"features must be a non-empty N x d matrix, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise DataError(f"expected {features.shape[0]} labels, got shape {labels.shape}")
        if labels.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DataError("labels must be integers")
        labels = labels.astype(np.int64)
        if np.isnan(features).any():
            raise DataError(f"dataset '{self.name}' contains NaN features")
        num_classes = int(self.num_classes) or int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= num_classes:
            raise DataError(f"labels must lie in [0, {num_classes}), got [{labels.min()}, {labels.max()}]")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", num_classes)

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: Sequence[int] | np.ndarray, name: str | None = None) -> Dataset:
        """Rows at ``indices`` in the given order; class count is inherited."""

        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise DataError(f"empty subset requested from '{self.name}'")
        if idx.min() < 0 or idx.max() >= len(self):
            raise DataError(f"subset indices out of range for '{self.name}' (size {len(self)})")
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            name=name or self.name,
            seed_of_origin=self.seed_of_origin,
            num_classes=self.num_classes,
        )

    def identical_to(self, other: Dataset) -> bool:
        return (
            self.num_classes == other.num_classes
            and self.features.shape == other.features.shape
            and self.features.tobytes() == other.features.tobytes()
            and self.labels.tobytes() == other.labels.tobytes()
        )


@dataclass(frozen=True, slots=True, eq=False)
class MembershipSplit:
    """Index sets into one :class:`Dataset`.

    ``forget`` and ``retain`` partition ``train``; ``unseen`` is drawn from ``test``.
    """

    train: np.ndarray
    test: np.ndarray
    forget: np.ndarray
    retain: np.ndarray
    unseen: np.ndarray

    def __post_init__(self) -> None:
        for name in ("train", "test", "forget", "retain", "unseen"):
            object.__setattr__(self, name, _index_array(getattr(self, name)))
        if np.intersect1d(self.forget, self.retain).size:
            raise ConfigurationError("forget and retain sets overlap")
        if not np.array_equal(np.union1d(self.forget, self.retain), self.train):
            raise ConfigurationError("forget and retain do not partition the training set")
        if np.intersect1d(self.train, self.test).size:
            raise ConfigurationError("train and test sets overlap")
        if not np.isin(self.unseen, self.test).all():
            raise ConfigurationError("unseen set must be drawn from the test set")

    def with_forget(self, forget: Sequence[int] | np.ndarray) -> MembershipSplit:
        """Same train/test framing with a different forget set."""

        forget_idx = _index_array(forget)
        if not np.isin(forget_idx, self.train).all():
            raise ConfigurationError("forget indices must come from the training set")
        return MembershipSplit(
            train=self.train,
            test=self.test,
            forget=forget_idx,
            retain=np.setdiff1d(self.train, forget_idx),
            unseen=self.unseen,
        )

    def pools(self) -> dict[int, np.ndarray]:
        return {UNSEEN: self.unseen, FORGET: self.forget, RETAIN: self.retain}

    def to_dict(self) -> dict[str, list[int]]:
        return {
            name: [int(i) for i in getattr(self, name)]
            for name in ("train", "test", "forget", "retain", "unseen")
        }


@dataclass(frozen=True, slots=True, eq=False)
class EvaluationTriple:
    """Subsampled unseen/forget/retain index sets used for attack evaluation."""

    unseen: np.ndarray
    forget: np.ndarray
    retain: np.ndarray

    def __post_init__(self) -> None:
        for name in ("unseen", "forget", "retain"):
            object.__setattr__(self, name, _index_array(getattr(self, name)))

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (int(self.unseen.size), int(self.forget.size), int(self.retain.size))

    def indices_and_labels(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated indices and canonical membership labels (unseen, forget, retain order)."""

        indices = np.concatenate([self.unseen, self.forget, self.retain])
        labels = np.concatenate(
            [
                np.full(self.unseen.size, UNSEEN, dtype=np.int64),
                np.full(self.forget.size, FORGET, dtype=np.int64),
                np.full(self.retain.size, RETAIN, dtype=np.int64),
            ]
        )
        return indices, labels
