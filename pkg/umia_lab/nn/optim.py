"""In-place first-order optimisers over lists of weight and bias arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from umia_lab.models import Gradients, ModelParams, Optimizer


@dataclass(slots=True)
class Sgd:
    learning_rate: float

    def step(self, weights: list[np.ndarray], biases: list[np.ndarray], grads: Gradients) -> None:
        for i, grad in enumerate(grads.weights):
            weights[i] -= self.learning_rate * grad
        for i, grad in enumerate(grads.biases):
            biases[i] -= self.learning_rate * grad


@dataclass(slots=True)
class Adam:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    _m: list[np.ndarray] = field(default_factory=list)
    _v: list[np.ndarray] = field(default_factory=list)

    def step(self, weights: list[np.ndarray], biases: list[np.ndarray], grads: Gradients) -> None:
        params = weights + biases
        flat_grads = list(grads.weights) + list(grads.biases)
        if not self._m:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for i, grad in enumerate(flat_grads):
            self._m[i] = self.beta1 * self._m[i] + (1.0 - self.beta1) * grad
            self._v[i] = self.beta2 * self._v[i] + (1.0 - self.beta2) * grad * grad
            update = self.learning_rate * (self._m[i] / correction1) / (np.sqrt(self._v[i] / correction2) + self.eps)
            params[i] -= update


def make_optimizer(kind: Optimizer | str, learning_rate: float) -> Sgd | Adam:
    if Optimizer(kind) is Optimizer.ADAM:
        return Adam(learning_rate=learning_rate)
    return Sgd(learning_rate=learning_rate)


def mutable_arrays(params: ModelParams) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Writable copies of a model's arrays for an optimisation loop."""

    return [w.copy() for w in params.weights], [b.copy() for b in params.biases]
