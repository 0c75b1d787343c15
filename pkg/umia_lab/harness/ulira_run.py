"""TC-ULiRA end to end: shadow trials on the adversary's data, then verdicts on target queries."""

from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path

from umia_lab.attack import equal_triple, make_shadow_runner, ulira_attack, ulira_fit
from umia_lab.core.seeding import derive_seed
from umia_lab.data import make_membership_split
from umia_lab.metrics import confusion, micro_f1, per_class_f1
from umia_lab.models import ConfusionMatrix, UliraFit
from umia_lab.pipeline import run_pipeline

from .collector import StageTracker
from .config_loader import ExperimentConfig
from .experiment import build_datasets, experiment_dir
from .report_io import write_confusion_csv, write_json


logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class UliraOutcome:
    fit: UliraFit
    confusion: ConfusionMatrix
    micro_f1: float
    per_class_f1: tuple[float, float, float]


def run_ulira(cfg: ExperimentConfig, seed: int, output_root: Path | str | None = None) -> UliraOutcome:
    tracker = StageTracker()
    directory = experiment_dir(cfg, output_root) / f"seed_{seed}"
    try:
        target, shadow = tracker.run("generate_dataset", lambda: build_datasets(cfg, seed), seed=seed)
        runner = make_shadow_runner(shadow, cfg.pipeline_spec(shadow=True), cfg.ulira.train_fraction)
        fit = tracker.run(
            "ulira_fit",
            lambda: ulira_fit(runner, cfg.ulira.num_shadow, derive_seed(seed, "ulira"), workers=cfg.workers),
            seed=seed,
        )
        split = tracker.run(
            "make_membership_split",
            lambda: make_membership_split(
                target, cfg.dataset.train_fraction, cfg.forget.fraction, derive_seed(seed, "target-split")
            ),
            seed=seed,
        )
        result = tracker.run(
            "run_target_pipeline",
            lambda: run_pipeline(target, split, cfg.pipeline_spec(), derive_seed(seed, "target")),
            seed=seed,
        )
        per_class = min(cfg.ulira.queries_per_class, split.forget.size)
        queries = equal_triple(split, derive_seed(seed, "ulira-queries"), size=per_class)
        indices, truth = queries.indices_and_labels()
        verdicts = tracker.run("ulira_classify", lambda: ulira_attack(fit, result, target, indices), seed=seed)
        cm = confusion(verdicts, truth)
    finally:
        tracker.write(directory.parent / "diagnostics.json")
    outcome = UliraOutcome(fit=fit, confusion=cm, micro_f1=micro_f1(cm), per_class_f1=per_class_f1(cm))
    write_json({"config_digest": cfg.digest(), "seed": seed, **fit.to_dict()}, directory / "ulira_fit.json")
    write_json(
        {
            "config_digest": cfg.digest(),
            "seed": seed,
            "micro_f1": outcome.micro_f1,
            "per_class_f1": list(outcome.per_class_f1),
            "confusion": cm.to_list(),
        },
        directory / "ulira_eval.json",
    )
    write_confusion_csv(cm, directory / "ulira_confusion.csv", cfg.digest())
    logger.info("TC-ULiRA semilla %d: micro F1 %.4f", seed, outcome.micro_f1)
    return outcome
