"""Attack feature construction from the posterior pair of the original and unlearned model."""

from __future__ import annotations

import numpy as np

from umia_lab.core.errors import DataError, ShapeError
from umia_lab.models import FeatureKind, FeatureMode


def derive_feature_matrix(
    p_orig: np.ndarray,
    p_unlearn: np.ndarray,
    true_labels: np.ndarray,
    mode: FeatureMode,
) -> np.ndarray:
    """Row-wise features for ``(n, C)`` posterior pairs."""

    before = np.atleast_2d(np.asarray(p_orig, dtype=np.float64))
    after = np.atleast_2d(np.asarray(p_unlearn, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(true_labels, dtype=np.int64))
    if before.shape != after.shape:
        raise ShapeError(f"posterior shapes differ: {before.shape} vs {after.shape}")
    n, num_classes = before.shape
    if labels.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {labels.shape}")
    if n and (labels.min() < 0 or labels.max() >= num_classes):
        raise DataError(f"true labels must lie in [0, {num_classes})")
    width = mode.dim(num_classes)
    rows = np.arange(n)
    a = before[rows, labels]
    b = after[rows, labels]
    kind = mode.kind
    if kind is FeatureKind.CP:
        features = np.concatenate([before, after], axis=1)
    elif kind is FeatureKind.CT:
        features = np.stack([a, b], axis=1)
    elif kind is FeatureKind.DF:
        features = (a - b)[:, None]
    elif kind is FeatureKind.SM:
        features = (a + b)[:, None]
    elif kind is FeatureKind.CDS:
        features = np.stack([a - b, a + b], axis=1)
    elif kind is FeatureKind.LABEL_ONLY:
        features = np.stack(
            [np.argmax(before, axis=1) == labels, np.argmax(after, axis=1) == labels], axis=1
        ).astype(np.float64)
    elif kind is FeatureKind.TOPK:
        top_before = -np.sort(-before, axis=1)[:, : mode.k]
        top_after = -np.sort(-after, axis=1)[:, : mode.k]
        features = np.concatenate([top_before, top_after], axis=1)
    else:
        features = np.round(np.stack([a, b], axis=1), mode.decimals)
    if features.shape != (n, width):  # pragma: no cover
        raise ShapeError(f"{mode.label()} produced width {features.shape[1]}, expected {width}")
    return features


def derive_features(p_orig: np.ndarray, p_unlearn: np.ndarray, true_label: int, mode: FeatureMode) -> np.ndarray:
    """Feature vector of a single query."""

    p_orig = np.asarray(p_orig, dtype=np.float64)
    p_unlearn = np.asarray(p_unlearn, dtype=np.float64)
    if p_orig.ndim != 1 or p_orig.shape != p_unlearn.shape:
        raise ShapeError("derive_features expects two posterior vectors of equal length")
    return derive_feature_matrix(p_orig[None, :], p_unlearn[None, :], np.array([true_label]), mode)[0]
