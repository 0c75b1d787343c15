"""Defense selection, DP-SGD configuration and the privacy ledger emitted by private runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from umia_lab.core.config import PRIVACY
from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import check_seed


class DefenseKind(str, Enum):
    NONE = "none"
    LABEL_ONLY = "label_only"
    DROPOUT = "dropout"
    DP = "dp"


@dataclass(frozen=True, slots=True)
class DefenseSpec:
    """Which defense protects the target; DP takes either ``epsilon`` or ``noise_multiplier``."""

    kind: DefenseKind = DefenseKind.NONE
    epsilon: float | None = None
    noise_multiplier: float | None = None
    dropout_rate: float = PRIVACY.dropout_rate

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DefenseKind(self.kind))
        if self.kind is DefenseKind.DP:
            if (self.epsilon is None) == (self.noise_multiplier is None):
                raise ConfigurationError("dp defense needs exactly one of epsilon or noise_multiplier")
            if self.epsilon is not None and not self.epsilon > 0:
                raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
            if self.noise_multiplier is not None and self.noise_multiplier < 0:
                raise ConfigurationError(f"noise_multiplier must be >= 0, got {self.noise_multiplier}")
        if not 0.0 <= self.dropout_rate <= 1.0:
            raise ConfigurationError(f"dropout rate must lie in [0, 1], got {self.dropout_rate}")

    def label(self) -> str:
        if self.kind is DefenseKind.DP:
            if self.epsilon is not None:
                return f"dp_eps{self.epsilon:g}"
            return f"dp_sigma{self.noise_multiplier:g}"
        return self.kind.value


@dataclass(frozen=True, slots=True)
class DpConfig:
    clip_norm: float = PRIVACY.clip_norm
    noise_multiplier: float = 1.0
    target_delta: float = PRIVACY.target_delta
    batch_size: int = PRIVACY.batch_size
    epochs: int = PRIVACY.epochs
    learning_rate: float = PRIVACY.learning_rate
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.clip_norm > 0:
            raise ConfigurationError(f"clip_norm must be positive, got {self.clip_norm}")
        if self.noise_multiplier < 0:
            raise ConfigurationError(f"noise_multiplier must be >= 0, got {self.noise_multiplier}")
        if not 0.0 < self.target_delta < 1.0:
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.target_delta}")
        if self.batch_size < 1 or self.epochs < 0 or not self.learning_rate > 0:
            raise ConfigurationError("invalid DP-SGD batch size, epochs or learning rate")
        object.__setattr__(self, "seed", check_seed(self.seed))


@dataclass(slots=True)
class PrivacyLedger:
    """Per-step sampling rate and noise, with cumulative epsilon at checkpoints."""

    delta: float
    steps: list[tuple[float, float]] = field(default_factory=list)
    checkpoints: list[dict[str, float]] = field(default_factory=list)

    def record_step(self, q: float, sigma: float) -> None:
        self.steps.append((q, sigma))

    def record_checkpoint(self, step: int, epsilon: float) -> None:
        self.checkpoints.append({"step": step, "epsilon": epsilon})

    def to_dict(self) -> dict[str, object]:
        return {
            "delta": self.delta,
            "steps": [{"q": q, "noise_multiplier": s} for q, s in self.steps],
            "checkpoints": list(self.checkpoints),
        }
