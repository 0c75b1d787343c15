"""Dropout regularisation on the last fully connected hidden layer."""

from __future__ import annotations

from dataclasses import replace

from umia_lab.core.config import PRIVACY
from umia_lab.core.errors import ConfigurationError
from umia_lab.models import ArchitectureSpec


def dropout_defense(arch: ArchitectureSpec, rate: float = PRIVACY.dropout_rate) -> ArchitectureSpec:
    """Rates ``[0, ..., rate, 0]``: only the last hidden layer drops units."""

    if not arch.hidden_sizes:
        raise ConfigurationError("dropout defense needs at least one hidden layer")
    if not 0.0 <= rate <= 1.0:
        raise ConfigurationError(f"dropout rate must lie in [0, 1], got {rate}")
    rates = [0.0] * (len(arch.hidden_sizes) + 1)
    rates[-2] = rate
    return replace(arch, dropout_rates=tuple(rates))
