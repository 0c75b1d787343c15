"""Smoke test: un experimento mínimo de extremo a extremo en un directorio temporal."""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path


ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from umia_lab.harness import load_config, run_experiment


def run_smoke() -> None:
    cfg = load_config(ROOT / "configs" / "tiny.yaml")
    with tempfile.TemporaryDirectory(prefix="umia-smoke-") as tmp:
        outcome = run_experiment(cfg, tmp)
        print(f"Ejecutando experimento '{cfg.name}' en {outcome.directory}")
        report = json.loads((outcome.directory / "seed_0" / "report.json").read_text(encoding="utf-8"))
        assert report["encoding"]["1"] == "forget", "Reporte sin leyenda de codificación"
        assert 0.0 <= report["micro_f1"] <= 1.0, "micro F1 fuera de rango"
        assert (outcome.directory / "aggregate.json").is_file(), "Falta aggregate.json"
        print("SMOKE_OK", {
            "micro_f1": round(report["micro_f1"], 4),
            "attack_train_size": report["attack_train_size"],
        })


if __name__ == "__main__":
    run_smoke()
