"""Membership inference against machine unlearning: models, attacks, defenses and the experiment harness."""

from __future__ import annotations

__all__ = [
    "attack",
    "core",
    "data",
    "defense",
    "harness",
    "main",
    "metrics",
    "models",
    "nn",
    "unlearn",
]

__version__ = "0.1.0"

from .harness.cli import main  # noqa: E402
