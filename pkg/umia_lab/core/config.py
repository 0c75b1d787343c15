"""Global configuration values for the unlearning privacy lab."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TrainingDefaults:
    """Desk-scale defaults for target and shadow model training."""

    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    optimizer: str = "adam"
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"


@dataclass(frozen=True)
class AttackTrainingDefaults:
    """Schedule of the tri-class attack classifier and the binary MIAs."""

    epochs: int = 300
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    optimizer: str = "adam"
    hidden_sizes: tuple[int, ...] = (32, 16)


@dataclass(frozen=True)
class UnlearningDefaults:
    num_shards: int = 4
    ga_steps: int = 15
    ga_lr: float = 0.02
    prune_ratio: float = 0.5
    finetune_epochs: int = 5
    scrub_max_epochs: int = 3
    scrub_min_epochs: int = 3
    scrub_temperature: float = 4.0
    scrub_lr: float = 5e-4


@dataclass(frozen=True)
class PrivacyDefaults:
    """DP-SGD knobs; only epsilon and delta come from the experiment config."""

    clip_norm: float = 1.0
    target_delta: float = 5e-4
    learning_rate: float = 0.1
    epochs: int = 30
    batch_size: int = 64
    dropout_rate: float = 0.95
    base_orders: tuple[float, ...] = tuple(1.0 + 0.25 * i for i in range(1, 253))
    extra_orders: tuple[float, ...] = (80.0, 96.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0, 16384.0)

    @property
    def orders(self) -> tuple[float, ...]:
        return self.base_orders + self.extra_orders


@dataclass(frozen=True)
class DeskDataset:
    """Default blob universe: 2000 train / 1000 test on the target side."""

    classes: int = 10
    dim: int = 20
    per_class: int = 600
    spread: float = 0.35
    radius: float = 1.0
    target_fraction: float = 0.5
    train_fraction: float = 2.0 / 3.0
    shadow_train_fraction: float = 0.8
    forget_fraction: float = 0.02


@dataclass(frozen=True)
class OverfitPreset:
    """Training knobs that move a model between the well-fitted and overfitted regimes."""

    epochs: int
    weight_decay: float


@dataclass(frozen=True)
class OutputConfig:
    root: Path = Path("runs")
    env_var: str = "UMIA_LAB_OUTPUT_ROOT"
    float_format: str = "%.17g"


@dataclass(frozen=True)
class NumericConfig:
    std_floor: float = 1e-6
    logit_clamp: float = 1e-9
    fpr_budget: float = 0.05
    ratio_tolerance: float = 1e-9


UNSEEN, FORGET, RETAIN = 0, 1, 2
ENCODING_LEGEND: dict[int, str] = {UNSEEN: "unseen", FORGET: "forget", RETAIN: "retain"}
ENCODING_HEADER = "encoding=0:unseen,1:forget,2:retain"

APP_NAME = "umia-lab"
TRAINING = TrainingDefaults()
ATTACK_TRAINING = AttackTrainingDefaults()
UNLEARNING = UnlearningDefaults()
PRIVACY = PrivacyDefaults()
DESK_DATASET = DeskDataset()
OUTPUT = OutputConfig()
NUMERIC = NumericConfig()
OVERFIT_PRESETS: dict[str, OverfitPreset] = {
    "low": OverfitPreset(epochs=20, weight_decay=1e-2),
    "high": OverfitPreset(epochs=200, weight_decay=0.0),
}
