"""Grids of experiments joined into one comparison table."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
import logging
from pathlib import Path
from typing import Any, Mapping, Sequence

import pandas as pd

from umia_lab.core.config import OUTPUT
from umia_lab.core.errors import ConfigurationError, LabError, StageError

from .config_loader import ExperimentConfig, config_from_mapping
from .experiment import resolve_output_root, run_experiment


logger = logging.getLogger(__name__)

KEY_COLUMNS = ["config", "method", "feature_mode", "defense", "seed", "row"]
METRIC_COLUMNS = [
    "micro_f1",
    "macro_f1",
    "f1_unseen",
    "f1_forget",
    "f1_retain",
    "tpr_unseen",
    "tpr_forget",
    "tpr_retain",
    "two_round_micro_f1",
    "uleak_micro_f1",
    "retain_mia_pre",
    "retain_mia_post",
    "train_acc",
    "test_acc",
    "unlearn_acc",
    "retain_acc",
    "test_acc_unlearned",
    "epsilon",
]
COMPARISON_COLUMNS = [*KEY_COLUMNS, *METRIC_COLUMNS, "config_digest", "error_stage", "error"]


def _report_row(name: str, payload: dict[str, Any]) -> dict[str, Any]:
    utility = payload["model_utility"]
    retain_mia = payload.get("retain_mia") or {}
    baselines = payload.get("baselines") or {}
    f1 = payload["per_class_f1"]
    tpr = payload["tpr_at_fpr"]
    return {
        "config": name,
        "method": payload["method"],
        "feature_mode": payload["feature_mode"],
        "defense": payload["defense"],
        "seed": payload["seed"],
        "row": "seed",
        "micro_f1": payload["micro_f1"],
        "macro_f1": payload["macro_f1"],
        "f1_unseen": f1[0],
        "f1_forget": f1[1],
        "f1_retain": f1[2],
        "tpr_unseen": tpr[0],
        "tpr_forget": tpr[1],
        "tpr_retain": tpr[2],
        "two_round_micro_f1": baselines.get("two_round_micro_f1"),
        "uleak_micro_f1": baselines.get("uleak_micro_f1"),
        "retain_mia_pre": retain_mia.get("pre"),
        "retain_mia_post": retain_mia.get("post"),
        "train_acc": utility["train_acc"],
        "test_acc": utility["test_acc"],
        "unlearn_acc": utility["unlearn_acc"],
        "retain_acc": utility["retain_acc"],
        "test_acc_unlearned": utility["test_acc_unlearned"],
        "epsilon": payload.get("epsilon"),
        "config_digest": payload["config_digest"],
        "error_stage": None,
        "error": None,
    }


def _median_row(rows: list[dict[str, Any]]) -> dict[str, Any]:
    frame = pd.DataFrame(rows)
    median = {col: frame[col].astype(float).median() for col in METRIC_COLUMNS}
    return {**rows[0], **median, "seed": None, "row": "median"}


def _error_row(name: str, stage: str, exc: BaseException) -> dict[str, Any]:
    row: dict[str, Any] = {col: None for col in COMPARISON_COLUMNS}
    row.update(config=name, row="error", error_stage=stage, error=f"{exc.__class__.__name__}: {exc}")
    return row


def _run_entry(
    index: int,
    entry: ExperimentConfig | Mapping[str, Any],
    output_root: Path,
    seeds: Sequence[int] | None,
) -> list[dict[str, Any]]:
    name = entry.name if isinstance(entry, ExperimentConfig) else str((entry or {}).get("name", f"config_{index}"))
    try:
        cfg = entry if isinstance(entry, ExperimentConfig) else config_from_mapping(entry)
        if seeds is not None:
            cfg = replace(cfg, seeds=tuple(seeds))
    except ConfigurationError as exc:
        logger.warning("Configuración '%s' inválida: %s", name, exc)
        return [_error_row(name, "load_config", exc)]
    try:
        outcome = run_experiment(cfg, output_root)
    except StageError as exc:
        logger.warning("Experimento '%s' falló en la etapa '%s'", name, exc.stage)
        return [_error_row(name, exc.stage, exc.__cause__ or exc)]
    except LabError as exc:
        logger.warning("Experimento '%s' falló: %s", name, exc)
        return [_error_row(name, "run_experiment", exc)]
    rows = [_report_row(cfg.name, report.to_dict()) for report in outcome.reports]
    return [*rows, _median_row(rows)]


def run_suite(
    grid: Sequence[ExperimentConfig | Mapping[str, Any]],
    name: str = "suite",
    output_root: Path | str | None = None,
    workers: int = 1,
    seeds: Sequence[int] | None = None,
) -> pd.DataFrame:
    """Run every config (a failure becomes an error row) and write ``comparison.csv``."""

    if not grid:
        raise ConfigurationError("a suite needs at least one config")
    if output_root is not None:
        root = Path(output_root)
    else:
        root = resolve_output_root(ExperimentConfig(), None)
    suite_dir = root / name
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        batches = list(pool.map(lambda item: _run_entry(item[0], item[1], suite_dir, seeds), enumerate(grid)))
    frame = pd.DataFrame([row for batch in batches for row in batch], columns=COMPARISON_COLUMNS)
    suite_dir.mkdir(parents=True, exist_ok=True)
    target = suite_dir / "comparison.csv"
    frame.to_csv(target, index=False, float_format=OUTPUT.float_format)
    failed = int((frame["row"] == "error").sum())
    logger.info("Suite '%s': %d filas, %d configuraciones fallidas -> %s", name, len(frame), failed, target)
    return frame
