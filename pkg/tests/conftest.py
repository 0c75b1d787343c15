from __future__ import annotations

import numpy as np
import pytest

from umia_lab.data import generate_blobs, make_membership_split
from umia_lab.harness import config_from_mapping
from umia_lab.models import ArchitectureSpec, Dataset, ModelParams, TrainConfig
from umia_lab.pipeline import PipelineSpec


@pytest.fixture
def blobs() -> Dataset:
    """120 points, 3 classes in 4 dimensions."""

    return generate_blobs(3, 4, 40, 0.3, seed=11, radius=2.0)


@pytest.fixture
def split(blobs: Dataset):
    return make_membership_split(blobs, 0.75, 0.1, seed=5)


@pytest.fixture
def arch() -> ArchitectureSpec:
    return ArchitectureSpec(hidden_sizes=(8,))


@pytest.fixture
def quick_cfg() -> TrainConfig:
    return TrainConfig(epochs=5, batch_size=16, learning_rate=0.01, weight_decay=0.0, seed=3)


@pytest.fixture
def quick_spec(arch: ArchitectureSpec, quick_cfg: TrainConfig) -> PipelineSpec:
    return PipelineSpec(arch=arch, train=quick_cfg)


def _zero_model(layer_sizes: tuple[int, ...], output_bias: tuple[float, ...] | None = None) -> ModelParams:
    weights = [np.zeros((b, a)) for a, b in zip(layer_sizes[:-1], layer_sizes[1:])]
    biases = [np.zeros(b) for b in layer_sizes[1:]]
    if output_bias is not None:
        biases[-1] = np.asarray(output_bias, dtype=np.float64)
    return ModelParams(layer_sizes=layer_sizes, weights=tuple(weights), biases=tuple(biases))


@pytest.fixture
def zero_model():
    """Factory for all-zero networks, optionally with a fixed output bias."""

    return _zero_model


TINY_EXPERIMENT = {
    "name": "tiny",
    "seeds": [0],
    "dataset": {"classes": 3, "dim": 4, "per_class": 60, "spread": 0.4, "radius": 1.5},
    "model": {"hidden_sizes": [16]},
    "train": {"epochs": 10, "batch_size": 16, "learning_rate": 0.01, "weight_decay": 0.0},
    "forget": {"fraction": 0.1},
    "attack": {"repetitions": 2, "baselines": True},
    "shadow": {"forget_fraction": 0.1},
    "ulira": {"num_shadow": 2, "queries_per_class": 3},
}


@pytest.fixture
def tiny_raw() -> dict:
    return {key: (dict(value) if isinstance(value, dict) else value) for key, value in TINY_EXPERIMENT.items()}


@pytest.fixture
def tiny_config(tiny_raw: dict):
    return config_from_mapping(tiny_raw)
