"""Report files: JSON reports, CSV tables and seed aggregates."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np
import pandas as pd

from umia_lab.core.config import ENCODING_HEADER, ENCODING_LEGEND, OUTPUT
from umia_lab.core.errors import DataError
from umia_lab.models import ConfusionMatrix, ExperimentReport


logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
AGGREGATE_FILE = "aggregate.json"


def sanitize(value: Any) -> Any:
    """JSON-safe copy: NaN/inf become ``None``, numpy scalars become Python numbers."""

    if isinstance(value, dict):
        return {str(key): sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    if isinstance(value, np.ndarray):
        return sanitize(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _header(config_digest: str | None) -> str:
    fields = [ENCODING_HEADER] + ([f"config_digest={config_digest}"] if config_digest else [])
    return "# " + ";".join(fields) + "\n"


def write_json(payload: Any, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(sanitize(payload), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return target


def write_confusion_csv(cm: ConfusionMatrix, path: Path | str, config_digest: str | None = None) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    names = [ENCODING_LEGEND[k] for k in range(3)]
    frame = pd.DataFrame(cm.counts, index=pd.Index(names, name="true\\predicted"), columns=names)
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(_header(config_digest))
        frame.to_csv(handle)
    return target


def write_predictions_csv(
    indices: np.ndarray,
    truth: np.ndarray,
    predicted: np.ndarray,
    probs: np.ndarray,
    path: Path | str,
    config_digest: str | None = None,
) -> Path:
    """Columns ``index,true_set,predicted_set,p0,p1,p2`` under an encoding/digest comment line."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            "index": np.asarray(indices, dtype=np.int64),
            "true_set": np.asarray(truth, dtype=np.int64),
            "predicted_set": np.asarray(predicted, dtype=np.int64),
            "p0": probs[:, 0],
            "p1": probs[:, 1],
            "p2": probs[:, 2],
        }
    )
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(_header(config_digest))
        frame.to_csv(handle, index=False, float_format=OUTPUT.float_format)
    return target


def flatten_report(payload: dict[str, Any]) -> dict[str, Any]:
    """Scalar view of a report dict: nested keys joined by dots, triples indexed by class name."""

    flat: dict[str, Any] = {}

    def visit(prefix: str, value: Any) -> None:
        if isinstance(value, dict):
            for key, item in value.items():
                visit(f"{prefix}.{key}" if prefix else str(key), item)
        elif isinstance(value, list) and len(value) == 3 and not isinstance(value[0], list):
            for k, item in enumerate(value):
                flat[f"{prefix}.{ENCODING_LEGEND[k]}"] = item
        elif not isinstance(value, list):
            flat[prefix] = value

    visit("", {k: v for k, v in payload.items() if k not in ("encoding", "confusion")})
    return flat


def aggregate_reports(payloads: Iterable[dict[str, Any]]) -> dict[str, Any]:
    """Median and mean of every numeric report field across seeds."""

    rows = [flatten_report(sanitize(p)) for p in payloads]
    if not rows:
        raise DataError("nothing to aggregate")
    frame = pd.DataFrame(rows).sort_values("seed", kind="stable")
    numeric = frame.drop(columns=["seed"]).select_dtypes(include="number")
    first = rows[0]
    return {
        "name": first.get("name"),
        "config_digest": first.get("config_digest"),
        "encoding": {str(k): v for k, v in ENCODING_LEGEND.items()},
        "seeds": [int(s) for s in frame["seed"]],
        "median": {key: float(val) for key, val in numeric.median().items()},
        "mean": {key: float(val) for key, val in numeric.mean().items()},
    }


def write_report(report: ExperimentReport, directory: Path | str) -> Path:
    return write_json(report.to_dict(), Path(directory) / REPORT_FILE)


def load_reports(run_dir: Path | str) -> list[dict[str, Any]]:
    root = Path(run_dir)
    files = sorted(root.glob(f"seed_*/{REPORT_FILE}"))
    if not files:
        raise DataError(f"no seed_*/{REPORT_FILE} files under {root}")
    return [json.loads(path.read_text(encoding="utf-8")) for path in files]


def render_aggregate(run_dir: Path | str) -> Path:
    """Recompute ``aggregate.json`` from the per-seed reports already on disk."""

    root = Path(run_dir)
    target = write_json(aggregate_reports(load_reports(root)), root / AGGREGATE_FILE)
    logger.info("Agregado regenerado en %s", target)
    return target
