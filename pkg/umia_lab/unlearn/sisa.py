"""Sharded ensembles: per-shard training, shard-local unlearning and persistence."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import json
import logging
from pathlib import Path
from typing import Mapping

import numpy as np

from umia_lab.core.errors import ConfigurationError, DataError
from umia_lab.core.seeding import derive_seed, rng_for
from umia_lab.models import ArchitectureSpec, Dataset, MembershipSplit, ModelParams, SisaModel, TrainConfig
from umia_lab.nn import init_model, load_checkpoint, predict_proba, save_checkpoint, train


logger = logging.getLogger(__name__)


def shard_seed(seed: int, shard_id: int) -> int:
    return derive_seed(seed, "sisa", shard_id)


def assign_shards(train_indices: np.ndarray, num_shards: int, seed: int) -> dict[int, int]:
    """Shuffle with a seeded permutation, then deal indices round-robin."""

    order = rng_for(seed, "sisa-shard").permutation(train_indices.size)
    return {int(train_indices[pos]): rank % num_shards for rank, pos in enumerate(order)}


def _shard_members(assignment: Mapping[int, int], shard_id: int) -> np.ndarray:
    return np.array(sorted(i for i, s in assignment.items() if s == shard_id), dtype=np.int64)


def _train_shard(template: ModelParams, data: Dataset, members: np.ndarray, cfg: TrainConfig, shard_id: int) -> ModelParams:
    if members.size == 0:
        raise DataError(f"shard {shard_id} has no training examples")
    seed = shard_seed(cfg.seed, shard_id)
    params = init_model(template.layer_sizes, template.activation, seed, dropout_rates=template.dropout_rates)
    return train(params, data.subset(members, name=f"{data.name}/shard{shard_id}"), cfg.with_seed(seed))


def sisa_train(
    data: Dataset,
    split: MembershipSplit,
    num_shards: int,
    cfg: TrainConfig,
    arch: ArchitectureSpec | None = None,
    assignment: Mapping[int, int] | None = None,
    workers: int = 1,
) -> SisaModel:
    """Train one model per shard; ``assignment`` overrides the seeded round-robin layout."""

    if num_shards < 1:
        raise ConfigurationError(f"num_shards must be >= 1, got {num_shards}")
    if num_shards > split.train.size:
        raise ConfigurationError(f"{num_shards} shards for only {split.train.size} training examples")
    arch = arch or ArchitectureSpec()
    if assignment is None:
        assignment = assign_shards(split.train, num_shards, cfg.seed)
    elif set(assignment) != {int(i) for i in split.train}:
        raise ConfigurationError("shard assignment must cover exactly the training set")
    template = init_model(arch.layer_sizes(data.dim, data.num_classes), arch.activation, 0, arch.dropout_rates)
    members = [_shard_members(assignment, s) for s in range(num_shards)]
    logger.info("Entrenando %d shards SISA (tamaños %s)", num_shards, [m.size for m in members])
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        models = list(pool.map(lambda s: _train_shard(template, data, members[s], cfg, s), range(num_shards)))
    return SisaModel(shard_assignment=dict(assignment), shard_models=tuple(models), num_shards=num_shards, train_cfg=cfg)


def sisa_unlearn(model: SisaModel, data: Dataset, forget: np.ndarray) -> SisaModel:
    """Retrain only the shards that held a forgotten index, with their original seeds."""

    forget_set = {int(i) for i in np.asarray(forget, dtype=np.int64)}
    unknown = forget_set.difference(model.shard_assignment)
    if unknown:
        raise ConfigurationError(f"forget indices outside the training set: {sorted(unknown)[:5]}")
    if not forget_set:
        return model
    touched = sorted({model.shard_assignment[i] for i in forget_set})
    assignment = {i: s for i, s in model.shard_assignment.items() if i not in forget_set}
    shards = list(model.shard_models)
    for shard_id in touched:
        shards[shard_id] = _train_shard(
            model.shard_models[shard_id],
            data,
            _shard_members(assignment, shard_id),
            model.train_cfg,
            shard_id,
        )
    logger.info("SISA: reentrenados %d de %d shards", len(touched), model.num_shards)
    return SisaModel(
        shard_assignment=assignment,
        shard_models=tuple(shards),
        num_shards=model.num_shards,
        train_cfg=model.train_cfg,
    )


def sisa_predict(model: SisaModel, x: np.ndarray) -> np.ndarray:
    probs = predict_proba(model, x)
    return probs[0] if np.ndim(x) == 1 else probs


def save_sisa(model: SisaModel, directory: Path | str) -> Path:
    """``manifest.json`` with the assignment plus one checkpoint per shard."""

    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    cfg = model.train_cfg
    manifest = {
        "num_shards": model.num_shards,
        "assignment": {str(i): s for i, s in sorted(model.shard_assignment.items())},
        "train_cfg": {
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "weight_decay": cfg.weight_decay,
            "optimizer": cfg.optimizer.value,
            "seed": cfg.seed,
        },
    }
    (root / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for shard_id, params in enumerate(model.shard_models):
        save_checkpoint(params, root / f"shard_{shard_id}.ckpt")
    return root


def load_sisa(directory: Path | str) -> SisaModel:
    root = Path(directory)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    num_shards = int(manifest["num_shards"])
    return SisaModel(
        shard_assignment={int(i): int(s) for i, s in manifest["assignment"].items()},
        shard_models=tuple(load_checkpoint(root / f"shard_{s}.ckpt") for s in range(num_shards)),
        num_shards=num_shards,
        train_cfg=TrainConfig(**manifest["train_cfg"]),
    )
