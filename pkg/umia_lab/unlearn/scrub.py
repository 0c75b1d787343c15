"""Teacher-student unlearning: push the student away from the teacher on the forget set, stay close on retain."""

from __future__ import annotations

import logging

import numpy as np
from scipy.special import log_softmax

from umia_lab.core.errors import DataError
from umia_lab.core.seeding import rng_for
from umia_lab.models import Dataset, MembershipSplit, ModelParams, TrainConfig, UnlearnConfig
from umia_lab.nn import backward_pass, forward_pass, make_optimizer, mutable_arrays, raw_logits


logger = logging.getLogger(__name__)


def softened_kl(student_logits: np.ndarray, teacher_logits: np.ndarray, temperature: float) -> np.ndarray:
    """Per-example KL(student || teacher) between temperature-softened posteriors."""

    log_s = log_softmax(student_logits / temperature, axis=1)
    log_t = log_softmax(teacher_logits / temperature, axis=1)
    return np.sum(np.exp(log_s) * (log_s - log_t), axis=1)


def scrub_kl(student: ModelParams, teacher: ModelParams, x: np.ndarray, temperature: float) -> np.ndarray:
    return softened_kl(raw_logits(student, np.atleast_2d(x)), raw_logits(teacher, np.atleast_2d(x)), temperature)


def _kl_logit_grad(student_logits: np.ndarray, teacher_logits: np.ndarray, temperature: float) -> np.ndarray:
    # d/dz of T^2 * KL(softmax(z/T) || softmax(t/T)), per example
    log_s = log_softmax(student_logits / temperature, axis=1)
    log_t = log_softmax(teacher_logits / temperature, axis=1)
    s = np.exp(log_s)
    kl = np.sum(s * (log_s - log_t), axis=1, keepdims=True)
    return temperature * s * (log_s - log_t - kl)


class _ScrubRun:
    def __init__(self, teacher: ModelParams, data: Dataset, cfg: UnlearnConfig, train_cfg: TrainConfig) -> None:
        self.teacher = teacher
        self.data = data
        self.cfg = cfg
        self.batch_size = train_cfg.batch_size
        self.weights, self.biases = mutable_arrays(teacher)
        self.optimizer = make_optimizer(train_cfg.optimizer, cfg.scrub_lr)
        self.rng = rng_for(train_cfg.seed, "scrub")
        self.teacher_logits = raw_logits(teacher, data.features)

    def student(self) -> ModelParams:
        return self.teacher.with_arrays(self.weights, self.biases)

    def epoch(self, indices: np.ndarray, maximize: bool) -> None:
        order = indices[self.rng.permutation(indices.size)]
        for start in range(0, order.size, self.batch_size):
            batch = order[start : start + self.batch_size]
            student = self.student()
            logits, cache = forward_pass(student, self.data.features[batch])
            dlogits = _kl_logit_grad(logits, self.teacher_logits[batch], self.cfg.scrub_temperature)
            if maximize:
                dlogits = -dlogits
            else:
                probs = np.exp(log_softmax(logits, axis=1))
                probs[np.arange(batch.size), self.data.labels[batch]] -= 1.0
                dlogits = dlogits + probs
            grads = backward_pass(student, cache, dlogits / batch.size)
            self.optimizer.step(self.weights, self.biases, grads)


def scrub_unlearn(
    teacher: ModelParams,
    data: Dataset,
    split: MembershipSplit,
    cfg: UnlearnConfig,
    train_cfg: TrainConfig | None = None,
) -> ModelParams:
    """Alternate max-steps on forget and min-steps on retain, then a tail of min-steps only."""

    if split.forget.size == 0 or split.retain.size == 0:
        raise DataError("SCRUB needs non-empty forget and retain sets")
    if cfg.scrub_max_epochs == 0 and cfg.scrub_min_epochs == 0:
        return teacher
    run = _ScrubRun(teacher, data, cfg, train_cfg or TrainConfig())
    for _ in range(cfg.scrub_max_epochs):
        run.epoch(split.forget, maximize=True)
        run.epoch(split.retain, maximize=False)
    for _ in range(cfg.scrub_min_epochs):
        run.epoch(split.retain, maximize=False)
    student = run.student()
    logger.debug(
        "SCRUB: KL medio olvido %.5f, retenido %.5f",
        float(scrub_kl(student, teacher, data.features[split.forget], cfg.scrub_temperature).mean()),
        float(scrub_kl(student, teacher, data.features[split.retain], cfg.scrub_temperature).mean()),
    )
    return student
