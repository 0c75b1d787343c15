"""Attack-side data structures: feature modes, attack sets, output policies, Gaussian fits."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from umia_lab.core.config import FORGET, RETAIN, UNSEEN
from umia_lab.core.errors import ConfigurationError, DataError, ShapeError


class FeatureKind(str, Enum):
    CP = "CP"
    CT = "CT"
    DF = "DF"
    SM = "SM"
    CDS = "CDS"
    LABEL_ONLY = "LABEL_ONLY"
    TOPK = "TOPK"
    ROUNDED = "ROUNDED"


@dataclass(frozen=True, slots=True)
class FeatureMode:
    kind: FeatureKind = FeatureKind.CDS
    k: int = 1
    decimals: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FeatureKind(self.kind))
        if self.k < 1:
            raise ConfigurationError(f"top-k needs k >= 1, got {self.k}")
        if self.decimals < 0:
            raise ConfigurationError(f"decimals must be >= 0, got {self.decimals}")

    def dim(self, num_classes: int) -> int:
        """Feature vector length for a ``num_classes``-way target model."""

        kind = self.kind
        if kind is FeatureKind.CP:
            return 2 * num_classes
        if kind in (FeatureKind.DF, FeatureKind.SM):
            return 1
        if kind is FeatureKind.TOPK:
            if self.k > num_classes:
                raise ConfigurationError(f"k={self.k} exceeds class count {num_classes}")
            return 2 * self.k
        return 2

    def label(self) -> str:
        if self.kind is FeatureKind.TOPK:
            return f"TOPK{self.k}"
        if self.kind is FeatureKind.ROUNDED:
            return f"ROUNDED{self.decimals}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> FeatureMode:
        """Inverse of :meth:`label` (``CDS``, ``TOPK3``, ``ROUNDED2`` ...)."""

        token = text.strip().upper()
        for prefix, kind in (("TOPK", FeatureKind.TOPK), ("ROUNDED", FeatureKind.ROUNDED)):
            if token.startswith(prefix):
                suffix = token[len(prefix) :]
                if not suffix.isdigit():
                    raise ConfigurationError(f"feature mode '{text}' needs a numeric suffix")
                if kind is FeatureKind.TOPK:
                    return cls(kind=kind, k=int(suffix))
                return cls(kind=kind, decimals=int(suffix))
        try:
            return cls(kind=FeatureKind(token))
        except ValueError as exc:
            raise ConfigurationError(f"unknown feature mode '{text}'") from exc


@dataclass(frozen=True, slots=True, eq=False)
class AttackExample:
    features: np.ndarray
    label: int

    def __post_init__(self) -> None:
        if self.label not in (UNSEEN, FORGET, RETAIN):
            raise DataError(f"membership label must be 0, 1 or 2, got {self.label}")


@dataclass(frozen=True, slots=True, eq=False)
class ShadowRecords:
    """Raw posterior pairs from shadow (or target) models with their membership labels.

    Keeping posteriors rather than features lets every feature mode, the
    U-Leak stand-in and the binary MIAs be derived from the same runs.
    """

    p_orig: np.ndarray
    p_unlearn: np.ndarray
    true_labels: np.ndarray
    membership: np.ndarray

    def __post_init__(self) -> None:
        n = self.true_labels.shape[0]
        if self.p_orig.shape != self.p_unlearn.shape or self.p_orig.shape[0] != n or self.membership.shape != (n,):
            raise ShapeError("shadow record arrays have inconsistent shapes")

    def __len__(self) -> int:
        return int(self.true_labels.shape[0])

    @classmethod
    def concat(cls, parts: list[ShadowRecords]) -> ShadowRecords:
        return cls(
            p_orig=np.concatenate([p.p_orig for p in parts]),
            p_unlearn=np.concatenate([p.p_unlearn for p in parts]),
            true_labels=np.concatenate([p.true_labels for p in parts]),
            membership=np.concatenate([p.membership for p in parts]),
        )

    def select(self, mask: np.ndarray) -> ShadowRecords:
        return ShadowRecords(
            p_orig=self.p_orig[mask],
            p_unlearn=self.p_unlearn[mask],
            true_labels=self.true_labels[mask],
            membership=self.membership[mask],
        )


@dataclass(frozen=True, slots=True, eq=False)
class AttackDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_mode: FeatureMode
    records: ShadowRecords | None = None

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise ShapeError("attack features and labels disagree in length")
        if self.labels.size and not np.isin(self.labels, (UNSEEN, FORGET, RETAIN)).all():
            raise DataError("attack labels must use the 0/1/2 membership encoding")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def class_counts(self) -> tuple[int, int, int]:
        counts = np.bincount(self.labels.astype(np.int64), minlength=3)
        return (int(counts[UNSEEN]), int(counts[FORGET]), int(counts[RETAIN]))

    def examples(self) -> list[AttackExample]:
        return [AttackExample(features=row, label=int(lab)) for row, lab in zip(self.features, self.labels)]


class OutputKind(str, Enum):
    FULL = "full"
    LABEL_ONLY = "label_only"
    TOP_K = "top_k"
    ROUNDED = "rounded"


@dataclass(frozen=True, slots=True)
class OutputPolicy:
    """What the serving API reveals of each posterior vector."""

    kind: OutputKind = OutputKind.FULL
    k: int = 1
    decimals: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OutputKind(self.kind))
        if self.k < 1 or self.decimals < 0:
            raise ConfigurationError(f"invalid output policy k={self.k} decimals={self.decimals}")


@dataclass(frozen=True, slots=True)
class GaussianFit:
    mean: float
    std: float


@dataclass(frozen=True, slots=True, eq=False)
class UliraFit:
    forget_gauss: GaussianFit
    unseen_gauss: GaussianFit
    retain_gauss: GaussianFit
    num_shadow: int

    def to_dict(self) -> dict[str, float | int]:
        return {
            "forget_mean": self.forget_gauss.mean,
            "forget_std": self.forget_gauss.std,
            "unseen_mean": self.unseen_gauss.mean,
            "unseen_std": self.unseen_gauss.std,
            "retain_mean": self.retain_gauss.mean,
            "retain_std": self.retain_gauss.std,
            "num_shadow": self.num_shadow,
        }
