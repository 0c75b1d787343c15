"""Server-side output policies: what a query reveals of the posterior."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from umia_lab.core.errors import ConfigurationError
from umia_lab.models import OutputKind, OutputPolicy


def apply_output_policy(policy: OutputPolicy, probs: np.ndarray) -> np.ndarray:
    """Transform ``(n, C)`` posteriors as the serving API would before answering."""

    probs = np.asarray(probs, dtype=np.float64)
    squeeze = probs.ndim == 1
    batch = np.atleast_2d(probs)
    kind = policy.kind
    if kind is OutputKind.FULL:
        out = batch.copy()
    elif kind is OutputKind.LABEL_ONLY:
        out = np.zeros_like(batch)
        out[np.arange(batch.shape[0]), np.argmax(batch, axis=1)] = 1.0
    elif kind is OutputKind.TOP_K:
        if policy.k > batch.shape[1]:
            raise ConfigurationError(f"top-k policy with k={policy.k} on {batch.shape[1]} classes")
        out = np.zeros_like(batch)
        keep = np.argsort(-batch, axis=1, kind="stable")[:, : policy.k]
        rows = np.arange(batch.shape[0])[:, None]
        out[rows, keep] = batch[rows, keep]
    else:
        out = np.round(batch, policy.decimals)
    return out[0] if squeeze else out


def label_only_mode(policy: OutputPolicy | None = None) -> OutputPolicy:
    """The label-only variant of ``policy``: the API returns a one-hot of its prediction."""

    return replace(policy or OutputPolicy(), kind=OutputKind.LABEL_ONLY)
