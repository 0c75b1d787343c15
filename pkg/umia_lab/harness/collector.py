"""Per-stage run diagnostics: wall time, process memory and CPU time, failures."""

from __future__ import annotations

from collections import defaultdict
import json
import logging
from pathlib import Path
import threading
import time
from typing import Any, Callable, TypeVar

import psutil

from umia_lab.core.errors import StageError


logger = logging.getLogger(__name__)

T = TypeVar("T")


def _process_sample(process: psutil.Process) -> dict[str, float]:
    try:
        with process.oneshot():
            cpu = process.cpu_times()
            rss = process.memory_info().rss
    except (psutil.Error, OSError):
        return {"rss_bytes": 0.0, "cpu_seconds": 0.0}
    return {"rss_bytes": float(rss), "cpu_seconds": float(cpu.user + cpu.system)}


class StageTracker:
    """Runs pipeline stages and keeps their resource usage; failures are re-raised as :class:`StageError`."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._process = psutil.Process()
        self._stages: list[dict[str, Any]] = []
        self._failures: defaultdict[str, int] = defaultdict(int)
        self._diagnostics: dict[str, Any] = {
            "started_at": time.time(),
            "last_error": None,
            "stage_failures": {},
            "cpu_count": psutil.cpu_count(logical=True),
        }

    def run(self, stage: str, fn: Callable[[], T], **context: Any) -> T:
        before = _process_sample(self._process)
        started = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            duration = time.perf_counter() - started
            logger.exception("La etapa '%s' falló", stage, exc_info=exc)
            with self._lock:
                self._failures[stage] += 1
                self._diagnostics["last_error"] = {
                    "stage": stage,
                    "message": str(exc),
                    "type": exc.__class__.__name__,
                    "timestamp": time.time(),
                    **context,
                }
                self._diagnostics["stage_failures"] = dict(self._failures)
                self._record(stage, duration, before, ok=False, context=context)
            if isinstance(exc, StageError):
                raise
            raise StageError(stage, str(exc)) from exc
        duration = time.perf_counter() - started
        with self._lock:
            self._record(stage, duration, before, ok=True, context=context)
        logger.info("Etapa '%s' completada en %.2f s", stage, duration)
        return result

    def _record(self, stage: str, duration: float, before: dict[str, float], ok: bool, context: dict[str, Any]) -> None:
        after = _process_sample(self._process)
        self._stages.append(
            {
                "stage": stage,
                "ok": ok,
                "duration_s": duration,
                "rss_bytes": after["rss_bytes"],
                "rss_delta_bytes": after["rss_bytes"] - before["rss_bytes"],
                "cpu_seconds": after["cpu_seconds"] - before["cpu_seconds"],
                **context,
            }
        )

    @property
    def failures(self) -> dict[str, int]:
        with self._lock:
            return dict(self._failures)

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return {
                **self._diagnostics,
                "finished_at": time.time(),
                "peak_rss_bytes": max((s["rss_bytes"] for s in self._stages), default=0.0),
                "stages": list(self._stages),
            }

    def write(self, path: Path | str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.snapshot(), indent=2, default=str), encoding="utf-8")
        return target
