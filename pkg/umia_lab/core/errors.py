"""Exception hierarchy shared by every lab component."""

from __future__ import annotations


class LabError(Exception):
    """Base class for all errors raised by umia_lab."""


class ConfigurationError(LabError, ValueError):
    """Invalid sizes, fractions, enum values or config keys."""


class ShapeError(LabError, ValueError):
    """Array dimensions do not match what a model or feature mode expects."""


class DataError(LabError, ValueError):
    """Labels out of range, NaN features or missing classes."""


class UndefinedMetricError(LabError, ValueError):
    """A metric was requested on data that cannot define it."""


class StageError(LabError):
    """A pipeline stage failed; the original exception is chained as ``__cause__``."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message
