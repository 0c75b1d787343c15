"""Parameter and training-configuration dataclasses for the MLP engine."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from umia_lab.core.errors import ConfigurationError, ShapeError
from umia_lab.core.seeding import check_seed


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"


class Optimizer(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


def _frozen(array: np.ndarray | Sequence[float]) -> np.ndarray:
    owned = np.array(array, dtype=np.float64, copy=True)
    owned.setflags(write=False)
    return owned


@dataclass(frozen=True, slots=True, eq=False)
class ModelParams:
    """Weights and biases of a dense feed-forward network.

    ``weights[i]`` has shape ``(layer_sizes[i + 1], layer_sizes[i])``.
    ``dropout_rates[i]`` applies to the activations produced by layer ``i``
    at training time; the last entry belongs to the output layer and stays 0.
    """

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: Activation = Activation.RELU
    dropout_rates: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        sizes = tuple(int(size) for size in self.layer_sizes)
        if len(sizes) < 2 or any(size < 1 for size in sizes):
            raise ConfigurationError(f"invalid layer sizes {self.layer_sizes!r}")
        n_layers = len(sizes) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ShapeError(f"expected {n_layers} weight/bias pairs for sizes {sizes}")
        weights = tuple(_frozen(w) for w in self.weights)
        biases = tuple(_frozen(b) for b in self.biases)
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise ShapeError(
                    f"layer {i}: got W{w.shape} b{b.shape}, expected "
                    f"W{(sizes[i + 1], sizes[i])} b{(sizes[i + 1],)}"
                )
        rates = tuple(float(r) for r in self.dropout_rates) or (0.0,) * n_layers
        if len(rates) != n_layers:
            raise ConfigurationError(f"dropout_rates needs {n_layers} entries, got {len(rates)}")
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ConfigurationError(f"dropout rates must lie in [0, 1], got {rates}")
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "dropout_rates", rates)

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def num_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def num_weights(self) -> int:
        return sum(w.size for w in self.weights)

    def with_arrays(self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]) -> ModelParams:
        return replace(self, weights=tuple(weights), biases=tuple(biases))

    def with_dropout(self, rates: Sequence[float]) -> ModelParams:
        return replace(self, dropout_rates=tuple(rates))

    def flat_weights(self) -> np.ndarray:
        """Concatenate weight matrices (biases excluded) in layer, row-major order."""

        return np.concatenate([w.ravel() for w in self.weights])

    def identical_to(self, other: ModelParams) -> bool:
        """Bit-level equality of architecture and every parameter."""

        if (
            self.layer_sizes != other.layer_sizes
            or self.activation != other.activation
            or self.dropout_rates != other.dropout_rates
        ):
            return False
        return all(
            np.array_equal(a, b) and a.tobytes() == b.tobytes()
            for a, b in zip(self.weights + self.biases, other.weights + other.biases)
        )


@dataclass(slots=True)
class Gradients:
    """Gradient bundle with the same layout as :class:`ModelParams`."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def flat(self) -> np.ndarray:
        return np.concatenate([w.ravel() for w in self.weights] + [b.ravel() for b in self.biases])

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))

    def scaled(self, factor: float) -> Gradients:
        return Gradients(
            weights=tuple(w * factor for w in self.weights),
            biases=tuple(b * factor for b in self.biases),
        )


@dataclass(frozen=True, slots=True)
class TrainConfig:
    """Minibatch optimisation schedule; ``seed`` drives init, shuffling and dropout."""

    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    optimizer: Optimizer = Optimizer.ADAM
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigurationError(f"weight_decay must be >= 0, got {self.weight_decay}")
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))
        object.__setattr__(self, "seed", check_seed(self.seed))

    def with_seed(self, seed: int) -> TrainConfig:
        return replace(self, seed=seed)


@dataclass(frozen=True, slots=True)
class ArchitectureSpec:
    """Hidden layout of an MLP; input and output widths come from the data."""

    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: Activation = Activation.RELU
    dropout_rates: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "dropout_rates", tuple(float(r) for r in self.dropout_rates))
        if any(h < 1 for h in self.hidden_sizes):
            raise ConfigurationError(f"hidden sizes must be positive, got {self.hidden_sizes}")
        if self.dropout_rates and len(self.dropout_rates) != len(self.hidden_sizes) + 1:
            raise ConfigurationError(
                f"dropout_rates needs {len(self.hidden_sizes) + 1} entries, got {len(self.dropout_rates)}"
            )
        if any(not 0.0 <= r <= 1.0 for r in self.dropout_rates):
            raise ConfigurationError(f"dropout rates must lie in [0, 1], got {self.dropout_rates}")

    def layer_sizes(self, input_dim: int, num_classes: int) -> tuple[int, ...]:
        return (input_dim, *self.hidden_sizes, num_classes)
