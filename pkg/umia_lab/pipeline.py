"""Train an original model and unlearn its forget set under a chosen defense.

Target runs, shadow repetitions and TC-ULiRA trials all go through
:func:`run_pipeline` so that they differ only in data, split and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
import logging

import numpy as np

from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import derive_seed
from umia_lab.defense import (
    apply_output_policy,
    calibrate_sigma,
    dp_sgd_train,
    dropout_defense,
    label_only_mode,
    steps_per_epoch,
)
from umia_lab.models import (
    ArchitectureSpec,
    Dataset,
    DefenseKind,
    DefenseSpec,
    DpConfig,
    MembershipSplit,
    ModelParams,
    OutputPolicy,
    PrivacyLedger,
    SisaModel,
    TrainConfig,
    UnlearnConfig,
    UnlearnMethod,
)
from umia_lab.nn import predict_proba
from umia_lab.unlearn import (
    gradient_ascent_unlearn,
    retrain,
    scrub_unlearn,
    sisa_train,
    sisa_unlearn,
    sparsity_unlearn,
    train_original,
)


logger = logging.getLogger(__name__)

ServedModel = ModelParams | SisaModel

# fine-tune on the retain set without noise
NON_PRIVATE_UNDER_DP = frozenset({UnlearnMethod.SPARSITY, UnlearnMethod.SCRUB})


@dataclass(frozen=True, slots=True)
class PipelineSpec:
    """Everything that shapes one original/unlearned model pair.

    ``unlearned_train`` overrides the schedule of retraining-based unlearning
    (retrain, SISA); when ``None`` it equals ``train``.
    """

    arch: ArchitectureSpec = field(default_factory=ArchitectureSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    unlearned_train: TrainConfig | None = None
    unlearn: UnlearnConfig = field(default_factory=UnlearnConfig)
    defense: DefenseSpec = field(default_factory=DefenseSpec)
    output_policy: OutputPolicy = field(default_factory=OutputPolicy)
    dp: DpConfig = field(default_factory=DpConfig)

    @property
    def served_policy(self) -> OutputPolicy:
        if self.defense.kind is DefenseKind.LABEL_ONLY:
            return label_only_mode(self.output_policy)
        return self.output_policy

    @property
    def effective_arch(self) -> ArchitectureSpec:
        if self.defense.kind is DefenseKind.DROPOUT:
            return dropout_defense(self.arch, self.defense.dropout_rate)
        return self.arch


@dataclass(slots=True)
class PipelineResult:
    original: ServedModel
    unlearned: ServedModel
    policy: OutputPolicy
    epsilon: float | None = None
    ledger: PrivacyLedger | None = None
    unlearned_ledger: PrivacyLedger | None = None

    def query(self, data: Dataset, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Served posteriors of both model versions for ``indices`` of ``data``."""

        x = data.features[indices]
        return (
            apply_output_policy(self.policy, predict_proba(self.original, x)),
            apply_output_policy(self.policy, predict_proba(self.unlearned, x)),
        )

    def ledgers_to_dict(self) -> dict[str, object]:
        """Both DP-SGD ledgers; ``unlearned`` is null when unlearning did not retrain."""

        return {
            "original": self.ledger.to_dict() if self.ledger is not None else None,
            "unlearned": self.unlearned_ledger.to_dict() if self.unlearned_ledger is not None else None,
        }


@lru_cache(maxsize=64)
def _calibrated_sigma(epsilon: float, steps: int, q: float, delta: float) -> float:
    return calibrate_sigma(epsilon, steps, q, delta)


def resolve_dp(spec: PipelineSpec, train_size: int, seed: int) -> DpConfig:
    """DP-SGD settings for a training set of ``train_size`` with the noise the defense asks for."""

    defense = spec.defense
    base = spec.dp
    if defense.noise_multiplier is not None:
        sigma = defense.noise_multiplier
    else:
        q = min(1.0, base.batch_size / train_size)
        steps = base.epochs * steps_per_epoch(train_size, base.batch_size)
        sigma = _calibrated_sigma(float(defense.epsilon), steps, q, base.target_delta)
    return replace(base, noise_multiplier=sigma, seed=seed)


def _private_fit(
    data: Dataset, indices: np.ndarray, spec: PipelineSpec, seed: int, ledger: PrivacyLedger
) -> tuple[ModelParams, float]:
    subset = data.subset(indices)
    dp = resolve_dp(spec, len(subset), seed)
    return dp_sgd_train(subset, spec.effective_arch, dp, ledger=ledger)


def run_pipeline(data: Dataset, split: MembershipSplit, spec: PipelineSpec, seed: int) -> PipelineResult:
    """Original model on ``split.train`` and its unlearned counterpart without ``split.forget``."""

    arch = spec.effective_arch
    method = spec.unlearn.method
    train_cfg = spec.train.with_seed(derive_seed(seed, "original"))
    post_cfg = (spec.unlearned_train or spec.train).with_seed(derive_seed(seed, "unlearned"))
    policy = spec.served_policy

    if spec.defense.kind is DefenseKind.DP:
        if method is UnlearnMethod.SISA:
            raise ConfigurationError("the DP defense is not available for SISA ensembles")
        if method in NON_PRIVATE_UNDER_DP:
            raise ConfigurationError(f"the DP defense is not available for {method.value} unlearning")
        ledger = PrivacyLedger(delta=spec.dp.target_delta)
        original, epsilon = _private_fit(data, split.train, spec, derive_seed(seed, "original"), ledger)
        post_ledger = None
        if method is UnlearnMethod.RETRAIN:
            post_ledger = PrivacyLedger(delta=spec.dp.target_delta)
            unlearned, post_eps = _private_fit(data, split.retain, spec, derive_seed(seed, "unlearned"), post_ledger)
            epsilon = max(epsilon, post_eps)
        else:
            unlearned = _approximate_unlearn(original, data, split, spec.unlearn, post_cfg)
        return PipelineResult(
            original=original,
            unlearned=unlearned,
            policy=policy,
            epsilon=epsilon,
            ledger=ledger,
            unlearned_ledger=post_ledger,
        )

    if method is UnlearnMethod.SISA:
        original = sisa_train(data, split, spec.unlearn.num_shards, train_cfg, arch)
        shard_cfg = post_cfg.with_seed(train_cfg.seed)
        unlearned = sisa_unlearn(replace(original, train_cfg=shard_cfg), data, split.forget)
        return PipelineResult(original=original, unlearned=unlearned, policy=policy)

    original = train_original(split, data, train_cfg, arch)
    if method is UnlearnMethod.RETRAIN:
        unlearned = retrain(split, data, post_cfg, arch)
    else:
        unlearned = _approximate_unlearn(original, data, split, spec.unlearn, post_cfg)
    return PipelineResult(original=original, unlearned=unlearned, policy=policy)


def _approximate_unlearn(
    original: ModelParams,
    data: Dataset,
    split: MembershipSplit,
    ucfg: UnlearnConfig,
    post_cfg: TrainConfig,
) -> ModelParams:
    method = ucfg.method
    if method is UnlearnMethod.GA:
        return gradient_ascent_unlearn(original, data, split.forget, ucfg.ga_steps, ucfg.ga_lr)
    if method is UnlearnMethod.SPARSITY:
        return sparsity_unlearn(original, data, split, ucfg.prune_ratio, ucfg.finetune_epochs, post_cfg)
    if method is UnlearnMethod.SCRUB:
        return scrub_unlearn(original, data, split, ucfg, post_cfg)
    raise ConfigurationError(f"{method.value} is not an approximate unlearning method")  # pragma: no cover

