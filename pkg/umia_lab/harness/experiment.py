"""End-to-end experiment runner: target and shadow pipelines, attack training and evaluation."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import os
from pathlib import Path
from typing import Any

import numpy as np

from umia_lab.attack import (
    AttackClassifier,
    attack_train_config,
    build_attack_training_set,
    infer_batch,
    mia_ensemble,
    records_for_triple,
    retain_amplification,
    train_attack,
    train_two_round,
    two_round_batch,
    uleak_attack,
)
from umia_lab.core.config import OUTPUT, RETAIN
from umia_lab.core.seeding import derive_seed
from umia_lab.data import (
    ForgetStrategy,
    attack_set_to_csv,
    balance_ratio_sample,
    ceil_count,
    generate_blobs,
    inject_outliers,
    make_membership_split,
    select_forget,
    split_target_shadow,
    split_to_json,
)
from umia_lab.metrics import (
    confusion,
    micro_f1,
    overfitting_degree,
    per_class_f1,
    separability_report,
    tpr_at_fpr_all,
)
from umia_lab.models import (
    AttackDataset,
    ConfusionMatrix,
    Dataset,
    ExperimentReport,
    MembershipSplit,
    ModelUtility,
    ShadowRecords,
)
from umia_lab.nn import accuracy
from umia_lab.pipeline import PipelineResult, run_pipeline
from umia_lab.unlearn import train_original

from .collector import StageTracker
from .config_loader import ExperimentConfig
from .report_io import aggregate_reports, write_confusion_csv, write_json, write_predictions_csv, write_report


logger = logging.getLogger(__name__)


@dataclass(slots=True)
class SeedContext:
    """Everything one seed of an experiment produces before attack evaluation."""

    seed: int
    target: Dataset
    shadow: Dataset
    split: MembershipSplit
    attack_set: AttackDataset
    result: PipelineResult
    classifier: AttackClassifier


@dataclass(slots=True)
class ExperimentOutcome:
    config: ExperimentConfig
    directory: Path
    reports: list[ExperimentReport]
    aggregate: dict[str, Any]


def resolve_output_root(cfg: ExperimentConfig, override: Path | str | None = None) -> Path:
    """``--output`` flag, then the environment variable, then the config, then ``./runs``."""

    if override is not None:
        return Path(override)
    env_value = os.environ.get(OUTPUT.env_var)
    if env_value:
        return Path(env_value)
    if cfg.output_root:
        return Path(cfg.output_root)
    return OUTPUT.root


def build_datasets(cfg: ExperimentConfig, seed: int) -> tuple[Dataset, Dataset]:
    ds = cfg.dataset
    universe = generate_blobs(
        ds.classes, ds.dim, ds.per_class, ds.spread, derive_seed(seed, "universe"), radius=ds.radius, name="universe"
    )
    target, shadow = split_target_shadow(universe, ds.target_fraction, derive_seed(seed, "target-shadow"))
    if cfg.shadow.relation == "shift":
        shifted = generate_blobs(
            ds.classes, ds.dim, ds.per_class, ds.spread, derive_seed(seed, "shifted-universe"), radius=ds.radius
        )
        _, shadow = split_target_shadow(shifted, ds.target_fraction, derive_seed(seed, "target-shadow"))
    return target, shadow


def _choose_forget(
    cfg: ExperimentConfig,
    seed: int,
    target: Dataset,
    split: MembershipSplit,
    attack_set: AttackDataset,
) -> tuple[Dataset, MembershipSplit]:
    forget = cfg.forget
    if forget.inject_outliers:
        return inject_outliers(target, split, forget.fraction, derive_seed(seed, "outliers"), forget.outlier_variance)
    strategy = ForgetStrategy(forget.strategy)
    if strategy is ForgetStrategy.RANDOM:
        return target, split
    spec = cfg.pipeline_spec()
    reference = train_original(split, target, spec.train.with_seed(derive_seed(seed, "reference")), spec.arch)
    ensemble = None
    if strategy in (ForgetStrategy.HIGH_VULNERABILITY, ForgetStrategy.LOW_VULNERABILITY):
        ensemble = mia_ensemble(attack_set.records, forget.ensemble_size, derive_seed(seed, "mia-ensemble"))
    selected = select_forget(strategy, target, split, reference, forget.fraction, seed, vulnerability=ensemble)
    return target, selected


def prepare_seed(cfg: ExperimentConfig, seed: int, tracker: StageTracker) -> SeedContext:
    """Run every stage up to (and including) attack training for one seed."""

    target, shadow = tracker.run("generate_dataset", lambda: build_datasets(cfg, seed), seed=seed)
    split = tracker.run(
        "make_membership_split",
        lambda: make_membership_split(
            target, cfg.dataset.train_fraction, cfg.forget.fraction, derive_seed(seed, "target-split")
        ),
        seed=seed,
    )
    attack_set = tracker.run(
        "build_attack_training_set",
        lambda: build_attack_training_set(
            shadow,
            cfg.pipeline_spec(shadow=True),
            cfg.attack.repetitions,
            derive_seed(seed, "shadow"),
            cfg.attack.mode,
            forget_fraction=cfg.shadow.forget_fraction,
            train_fraction=cfg.shadow.train_fraction,
            workers=cfg.workers,
        ),
        seed=seed,
    )
    target, split = tracker.run("select_forget", lambda: _choose_forget(cfg, seed, target, split, attack_set), seed=seed)
    result = tracker.run(
        "run_target_pipeline",
        lambda: run_pipeline(target, split, cfg.pipeline_spec(), derive_seed(seed, "target")),
        seed=seed,
    )
    classifier = tracker.run(
        "train_attack",
        lambda: train_attack(attack_set, attack_train_config(derive_seed(seed, "attack"))),
        seed=seed,
    )
    return SeedContext(
        seed=seed,
        target=target,
        shadow=shadow,
        split=split,
        attack_set=attack_set,
        result=result,
        classifier=classifier,
    )


def _model_utility(ctx: SeedContext) -> ModelUtility:
    data, split, result = ctx.target, ctx.split, ctx.result

    def acc(model: Any, idx: np.ndarray) -> float:
        return accuracy(model, data.features[idx], data.labels[idx])

    return ModelUtility(
        train_acc=acc(result.original, split.train),
        test_acc=acc(result.original, split.test),
        unlearn_acc=acc(result.unlearned, split.forget),
        retain_acc=acc(result.unlearned, split.retain),
        test_acc_unlearned=acc(result.unlearned, split.test),
    )


def _baselines(ctx: SeedContext, records: ShadowRecords, seed: int) -> tuple[dict[str, float], Any]:
    shadow_records = ctx.attack_set.records
    mia_orig, mia_unlearn = train_two_round(shadow_records, derive_seed(seed, "two-round"))
    two_round = two_round_batch(mia_orig, mia_unlearn, records.p_orig, records.p_unlearn, records.true_labels)
    uleak = uleak_attack(shadow_records, attack_train_config(derive_seed(seed, "uleak")))
    uleak_labels, _ = infer_batch(uleak, records.p_orig, records.p_unlearn, records.true_labels)
    retain = records.select(records.membership == RETAIN)
    amplification = retain_amplification(mia_orig, mia_unlearn, retain.p_orig, retain.p_unlearn)
    scores = {
        "two_round_micro_f1": micro_f1(confusion(two_round, records.membership)),
        "uleak_micro_f1": micro_f1(confusion(uleak_labels, records.membership)),
    }
    return scores, amplification


def evaluate_seed(
    cfg: ExperimentConfig,
    ctx: SeedContext,
    tracker: StageTracker,
    directory: Path | None = None,
) -> ExperimentReport:
    seed = ctx.seed
    triple = tracker.run(
        "balance_ratio_sample",
        lambda: balance_ratio_sample(ctx.split, cfg.attack.class_ratio, derive_seed(seed, "evaluation")),
        seed=seed,
    )
    records = records_for_triple(ctx.result, ctx.target, triple)
    indices, _ = triple.indices_and_labels()

    def attack_eval() -> tuple[np.ndarray, np.ndarray, ConfusionMatrix]:
        predicted, probs = infer_batch(ctx.classifier, records.p_orig, records.p_unlearn, records.true_labels)
        return predicted, probs, confusion(predicted, records.membership)

    predicted, probs, cm = tracker.run("evaluate_attack", attack_eval, seed=seed)
    utility = tracker.run("model_utility", lambda: _model_utility(ctx), seed=seed)
    separability = tracker.run(
        "separability",
        lambda: separability_report(ctx.result.original, ctx.result.unlearned, ctx.split, ctx.target),
        seed=seed,
    )
    baselines: dict[str, float] = {}
    amplification = None
    if cfg.attack.baselines:
        baselines, amplification = tracker.run("baselines", lambda: _baselines(ctx, records, seed), seed=seed)

    shadow_train = ceil_count(cfg.shadow.train_fraction, len(ctx.shadow))
    report = ExperimentReport(
        name=cfg.name,
        seed=seed,
        config_digest=cfg.digest(),
        method=cfg.unlearn.method.value,
        feature_mode=cfg.attack.feature_mode,
        defense=cfg.defense.label(),
        micro_f1=micro_f1(cm),
        per_class_f1=per_class_f1(cm),
        tpr_at_fpr=tpr_at_fpr_all(probs, records.membership, cfg.attack.fpr_budget),
        confusion=cm,
        model_utility=utility,
        overfitting={
            "original": overfitting_degree(utility.train_acc, utility.test_acc),
            "unlearned": overfitting_degree(utility.retain_acc, utility.test_acc_unlearned),
        },
        separability=separability,
        retain_mia=amplification,
        baselines=baselines,
        attack_train_size=len(ctx.attack_set),
        attack_train_fraction=len(ctx.attack_set) / shadow_train,
        evaluation_sizes=triple.sizes,
        epsilon=ctx.result.epsilon,
    )
    logger.info(
        "Semilla %d: micro F1 %.4f, F1 por clase %s, utilidad %s",
        seed,
        report.micro_f1,
        tuple(round(v, 4) for v in report.per_class_f1),
        utility,
    )
    if directory is not None:
        write_report(report, directory)
        write_confusion_csv(cm, directory / "confusion.csv", report.config_digest)
        write_predictions_csv(
            indices, records.membership, predicted, probs, directory / "predictions.csv", report.config_digest
        )
        split_to_json(ctx.split, directory / "split.json")
        attack_set_to_csv(ctx.attack_set, directory / "attack_train.csv")
        if ctx.result.ledger is not None:
            write_json(ctx.result.ledgers_to_dict(), directory / "privacy_ledger.json")
    return report


def experiment_dir(cfg: ExperimentConfig, output_root: Path | str | None = None) -> Path:
    return resolve_output_root(cfg, output_root) / cfg.name


def run_experiment(cfg: ExperimentConfig, output_root: Path | str | None = None) -> ExperimentOutcome:
    """All seeds of ``cfg``; writes the per-seed files, ``aggregate.json`` and ``diagnostics.json``."""

    directory = experiment_dir(cfg, output_root)
    tracker = StageTracker()
    logger.info("Experimento '%s' (%d semillas) en %s", cfg.name, len(cfg.seeds), directory)
    reports = []
    try:
        for seed in cfg.seeds:
            ctx = prepare_seed(cfg, seed, tracker)
            reports.append(evaluate_seed(cfg, ctx, tracker, directory / f"seed_{seed}"))
        aggregate = aggregate_reports(r.to_dict() for r in reports)
        write_json(aggregate, directory / "aggregate.json")
    finally:
        tracker.write(directory / "diagnostics.json")
    return ExperimentOutcome(config=cfg, directory=directory, reports=reports, aggregate=aggregate)
