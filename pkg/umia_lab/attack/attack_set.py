"""Attack training sets built from repeated shadow unlearning runs."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import logging


from umia_lab.core.config import DESK_DATASET
from umia_lab.core.errors import ConfigurationError
from umia_lab.core.seeding import derive_seed, rng_for
from umia_lab.data import make_membership_split
from umia_lab.models import AttackDataset, Dataset, EvaluationTriple, FeatureMode, MembershipSplit, ShadowRecords
from umia_lab.pipeline import PipelineResult, PipelineSpec, run_pipeline

from .features import derive_feature_matrix


logger = logging.getLogger(__name__)


def records_for_triple(result: PipelineResult, data: Dataset, triple: EvaluationTriple) -> ShadowRecords:
    """Served posterior pairs for every index of ``triple`` with canonical membership labels."""

    indices, membership = triple.indices_and_labels()
    p_orig, p_unlearn = result.query(data, indices)
    return ShadowRecords(p_orig=p_orig, p_unlearn=p_unlearn, true_labels=data.labels[indices], membership=membership)


def equal_triple(split: MembershipSplit, seed: int, size: int | None = None) -> EvaluationTriple:
    """``size`` examples from each pool (default: the whole forget set)."""

    size = split.forget.size if size is None else size
    if size < 1 or min(split.unseen.size, split.forget.size, split.retain.size) < size:
        raise ConfigurationError(
            f"cannot draw {size} examples per class from pools "
            f"{(split.unseen.size, split.forget.size, split.retain.size)}"
        )
    rng = rng_for(seed, "equal-triple")
    return EvaluationTriple(
        unseen=rng.choice(split.unseen, size=size, replace=False),
        forget=rng.choice(split.forget, size=size, replace=False),
        retain=rng.choice(split.retain, size=size, replace=False),
    )


def attack_set_from_records(records: ShadowRecords, mode: FeatureMode) -> AttackDataset:
    features = derive_feature_matrix(records.p_orig, records.p_unlearn, records.true_labels, mode)
    return AttackDataset(features=features, labels=records.membership, feature_mode=mode, records=records)


def _repetition(
    shadow: Dataset,
    spec: PipelineSpec,
    seed: int,
    repetition: int,
    train_fraction: float,
    forget_fraction: float,
) -> ShadowRecords:
    rep_seed = derive_seed(seed, "shadow-repetition", repetition)
    split = make_membership_split(shadow, train_fraction, forget_fraction, rep_seed)
    result = run_pipeline(shadow, split, spec, rep_seed)
    records = records_for_triple(result, shadow, equal_triple(split, rep_seed))
    logger.debug("Repetición sombra %d: %d registros", repetition, len(records))
    return records


def build_attack_training_set(
    shadow: Dataset,
    spec: PipelineSpec,
    repetitions: int,
    seed: int,
    mode: FeatureMode | None = None,
    forget_fraction: float = DESK_DATASET.forget_fraction,
    train_fraction: float = DESK_DATASET.shadow_train_fraction,
    workers: int = 1,
) -> AttackDataset:
    """Concatenate ``repetitions`` balanced shadow triples (each with its own split and models)."""

    if repetitions < 1:
        raise ConfigurationError(f"repetitions must be >= 1, got {repetitions}")
    mode = mode or FeatureMode()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(
            pool.map(
                lambda r: _repetition(shadow, spec, seed, r, train_fraction, forget_fraction),
                range(repetitions),
            )
        )
    records = ShadowRecords.concat(parts)
    attack_set = attack_set_from_records(records, mode)
    logger.info(
        "Conjunto de ataque: %d ejemplos de %d repeticiones (por clase %s)",
        len(attack_set),
        repetitions,
        attack_set.class_counts,
    )
    return attack_set


__all__ = [
    "attack_set_from_records",
    "build_attack_training_set",
    "equal_triple",
    "records_for_triple",
]
