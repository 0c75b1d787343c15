"""YAML experiment configuration mapped onto a tree of frozen dataclasses."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass, replace
from enum import Enum
import hashlib
import json
import logging
from pathlib import Path
import types
from typing import Any, Mapping, Union, get_args, get_origin, get_type_hints

import yaml

from umia_lab.core.config import DESK_DATASET, NUMERIC, OVERFIT_PRESETS
from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import check_seed
from umia_lab.data import ForgetStrategy
from umia_lab.models import (
    ArchitectureSpec,
    DefenseSpec,
    DpConfig,
    FeatureMode,
    OutputPolicy,
    TrainConfig,
    UnlearnConfig,
    UnlearnMethod,
)
from umia_lab.pipeline import PipelineSpec


logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class DatasetSection:
    """Blob universe shared by target and shadow data."""

    classes: int = DESK_DATASET.classes
    dim: int = DESK_DATASET.dim
    per_class: int = DESK_DATASET.per_class
    spread: float = DESK_DATASET.spread
    radius: float = DESK_DATASET.radius
    target_fraction: float = DESK_DATASET.target_fraction
    train_fraction: float = DESK_DATASET.train_fraction


@dataclass(frozen=True, slots=True)
class OverfitSection:
    original: str | None = None
    unlearned: str | None = None

    def __post_init__(self) -> None:
        for value in (self.original, self.unlearned):
            if value is not None and value not in OVERFIT_PRESETS:
                raise ConfigurationError(f"unknown overfit preset '{value}' (expected one of {sorted(OVERFIT_PRESETS)})")


@dataclass(frozen=True, slots=True)
class ForgetSection:
    fraction: float = DESK_DATASET.forget_fraction
    strategy: str = ForgetStrategy.RANDOM.value
    inject_outliers: bool = False
    outlier_variance: float = 5.0
    ensemble_size: int = 4

    def __post_init__(self) -> None:
        try:
            ForgetStrategy(self.strategy)
        except ValueError as exc:
            raise ConfigurationError(f"unknown forget strategy '{self.strategy}'") from exc
        if self.inject_outliers and self.strategy != ForgetStrategy.RANDOM.value:
            raise ConfigurationError("outlier injection picks its own forget set; leave strategy at 'random'")
        if self.ensemble_size < 2:
            raise ConfigurationError(f"ensemble_size must be >= 2, got {self.ensemble_size}")


@dataclass(frozen=True, slots=True)
class AttackSection:
    feature_mode: str = "CDS"
    repetitions: int = 5
    class_ratio: tuple[int, int, int] = (1, 1, 1)
    fpr_budget: float = NUMERIC.fpr_budget
    baselines: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "feature_mode", FeatureMode.parse(self.feature_mode).label())
        object.__setattr__(self, "class_ratio", tuple(int(r) for r in self.class_ratio))
        if self.repetitions < 1:
            raise ConfigurationError(f"repetitions must be >= 1, got {self.repetitions}")
        if len(self.class_ratio) != 3 or min(self.class_ratio) < 1:
            raise ConfigurationError(f"class_ratio needs three positive entries, got {self.class_ratio}")
        if not 0.0 < self.fpr_budget < 1.0:
            raise ConfigurationError(f"fpr_budget must lie in (0, 1), got {self.fpr_budget}")

    @property
    def mode(self) -> FeatureMode:
        return FeatureMode.parse(self.feature_mode)


@dataclass(frozen=True, slots=True)
class ShadowSection:
    """How the adversary's shadow pipeline differs from the target's."""

    relation: str = "disjoint"
    train_fraction: float = DESK_DATASET.shadow_train_fraction
    forget_fraction: float = DESK_DATASET.forget_fraction
    model: ArchitectureSpec | None = None
    unlearn_method: str | None = None

    def __post_init__(self) -> None:
        if self.relation not in ("disjoint", "shift"):
            raise ConfigurationError(f"shadow relation must be 'disjoint' or 'shift', got '{self.relation}'")
        if self.unlearn_method is not None:
            try:
                UnlearnMethod(self.unlearn_method)
            except ValueError as exc:
                raise ConfigurationError(f"unknown shadow unlearning method '{self.unlearn_method}'") from exc


@dataclass(frozen=True, slots=True)
class UliraSection:
    num_shadow: int = 16
    train_fraction: float = 0.5
    queries_per_class: int = 20

    def __post_init__(self) -> None:
        if self.num_shadow < 2:
            raise ConfigurationError(f"num_shadow must be >= 2, got {self.num_shadow}")
        if self.queries_per_class < 1:
            raise ConfigurationError(f"queries_per_class must be >= 1, got {self.queries_per_class}")


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    name: str = "experiment"
    seeds: tuple[int, ...] = (0,)
    output_root: str | None = None
    workers: int = 1
    dataset: DatasetSection = field(default_factory=DatasetSection)
    model: ArchitectureSpec = field(default_factory=ArchitectureSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    overfit: OverfitSection = field(default_factory=OverfitSection)
    unlearn: UnlearnConfig = field(default_factory=UnlearnConfig)
    forget: ForgetSection = field(default_factory=ForgetSection)
    attack: AttackSection = field(default_factory=AttackSection)
    defense: DefenseSpec = field(default_factory=DefenseSpec)
    output_policy: OutputPolicy = field(default_factory=OutputPolicy)
    dp: DpConfig = field(default_factory=DpConfig)
    shadow: ShadowSection = field(default_factory=ShadowSection)
    ulira: UliraSection = field(default_factory=UliraSection)

    def __post_init__(self) -> None:
        object.__setattr__(self, "seeds", tuple(check_seed(s) for s in self.seeds))
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if not self.name or "/" in self.name:
            raise ConfigurationError(f"invalid experiment name '{self.name}'")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")

    def pipeline_spec(self, shadow: bool = False) -> PipelineSpec:
        """Target pipeline, or the adversary's shadow pipeline with its overrides applied."""

        arch = self.model
        unlearn = self.unlearn
        if shadow:
            arch = self.shadow.model or arch
            if self.shadow.unlearn_method is not None:
                unlearn = replace(unlearn, method=UnlearnMethod(self.shadow.unlearn_method))
        unlearned_train = None
        if self.overfit.unlearned is not None:
            unlearned_train = _with_preset(self.train, self.overfit.unlearned)
        return PipelineSpec(
            arch=arch,
            train=_with_preset(self.train, self.overfit.original),
            unlearned_train=unlearned_train,
            unlearn=unlearn,
            defense=self.defense,
            output_policy=self.output_policy,
            dp=self.dp,
        )

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(self)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON rendering (sorted keys, seeds excluded)."""

        payload = self.to_dict()
        payload.pop("seeds")
        payload.pop("output_root")
        payload.pop("workers")
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _with_preset(train: TrainConfig, preset: str | None) -> TrainConfig:
    if preset is None:
        return train
    knobs = OVERFIT_PRESETS[preset]
    return replace(train, epochs=knobs.epochs, weight_decay=knobs.weight_decay)


def _jsonable(value: Any) -> Any:
    if is_dataclass(value):
        return {f.name: _jsonable(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


def _dataclass_in(hint: Any) -> type | None:
    if isinstance(hint, type) and is_dataclass(hint):
        return hint
    if get_origin(hint) in (Union, types.UnionType):
        for arg in get_args(hint):
            if isinstance(arg, type) and is_dataclass(arg):
                return arg
    return None


def build_section(cls: type, raw: Any, path: str) -> Any:
    """Instantiate dataclass ``cls`` from a mapping, rejecting unknown keys by dotted path."""

    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigurationError(f"{path or '<root>'}: expected a mapping, got {type(raw).__name__}")
    hints = get_type_hints(cls)
    known = {f.name for f in fields(cls) if f.init}
    unknown = sorted(set(raw) - known)
    if unknown:
        prefix = f"{path}." if path else ""
        raise ConfigurationError(f"unknown configuration key '{prefix}{unknown[0]}'")
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        child = f"{path}.{key}" if path else key
        nested = _dataclass_in(hints[key])
        if nested is not None and (value is not None or hints[key] is nested):
            kwargs[key] = build_section(nested, value, child)
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path or '<root>'}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path or '<root>'}: invalid value ({exc})") from exc


def config_from_mapping(raw: Mapping[str, Any]) -> ExperimentConfig:
    return build_section(ExperimentConfig, raw, "")


def load_config(path: Path | str) -> ExperimentConfig:
    source = Path(path)
    try:
        raw = yaml.safe_load(source.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{source}: not valid YAML ({exc})") from exc
    config = config_from_mapping(raw or {})
    logger.info("Configuración '%s' cargada desde %s (digest %s)", config.name, source, config.digest()[:12])
    return config


def load_suite(path: Path | str) -> tuple[str, list[dict[str, Any]]]:
    """Suite file: ``name``, optional ``base`` mapping and a list of ``experiments`` overriding it.

    Returns raw merged mappings so that one invalid entry does not stop the others from loading.
    """

    source = Path(path)
    try:
        raw = yaml.safe_load(source.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{source}: not valid YAML ({exc})") from exc
    unknown = sorted(set(raw) - {"name", "base", "experiments"})
    if unknown:
        raise ConfigurationError(f"unknown suite key '{unknown[0]}'")
    entries = raw.get("experiments") or []
    if not entries:
        raise ConfigurationError(f"{source}: a suite needs at least one experiment")
    base = raw.get("base") or {}
    return str(raw.get("name", source.stem)), [merge_mappings(base, entry) for entry in entries]


def merge_mappings(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_mappings(merged[key], value)
        else:
            merged[key] = value
    return merged
