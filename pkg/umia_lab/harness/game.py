"""The tri-class membership game between a challenger and an adversary.

The challenger draws ``b`` uniformly from {unseen, forget, retain}, samples a
query from that pool and hands it to the adversary, who wins when its guess
equals ``b``.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from umia_lab.attack import infer_batch
from umia_lab.core.config import FORGET, RETAIN, UNSEEN
from umia_lab.core.errors import ConfigurationError, DataError
from umia_lab.core.seeding import derive_seed, rng_for
from umia_lab.models import GameResult

from .collector import StageTracker
from .config_loader import ExperimentConfig
from .experiment import experiment_dir, prepare_seed
from .report_io import write_json


logger = logging.getLogger(__name__)

Adversary = Callable[[int], int]


def simulate_game(pools: Mapping[int, np.ndarray], adversary: Adversary, trials: int, seed: int) -> GameResult:
    """Play ``trials`` rounds; ``adversary`` maps a dataset index to a guess in {0, 1, 2}."""

    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    for b in (UNSEEN, FORGET, RETAIN):
        if np.asarray(pools.get(b, ())).size == 0:
            raise DataError(f"membership pool {b} is empty")
    rng = rng_for(seed, "game")
    successes = np.zeros(3, dtype=np.int64)
    played = np.zeros(3, dtype=np.int64)
    for _ in range(trials):
        b = int(rng.integers(0, 3))
        pool = pools[b]
        z = int(pool[rng.integers(0, len(pool))])
        guess = adversary(z)
        played[b] += 1
        successes[b] += int(guess == b)
    accuracy = tuple(float(s / p) if p else 0.0 for s, p in zip(successes, played))
    return GameResult(
        trials=trials,
        successes=int(successes.sum()),
        per_class_accuracy=accuracy,
        per_class_trials=tuple(int(p) for p in played),
    )


def oracle_adversary(pools: Mapping[int, np.ndarray]) -> Adversary:
    """Adversary that reads the true pool of each index."""

    lookup = {int(i): b for b, pool in pools.items() for i in pool}
    return lambda z: lookup[z]


def constant_adversary(guess: int = UNSEEN) -> Adversary:
    return lambda z: guess


def play_game(
    cfg: ExperimentConfig,
    trials: int,
    seed: int,
    output_root: Path | str | None = None,
) -> GameResult:
    """Train the target, shadow models and attack for ``seed``, then let the attack play."""

    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    tracker = StageTracker()
    ctx = prepare_seed(cfg, seed, tracker)
    pools = ctx.split.pools()
    queried = np.unique(np.concatenate(list(pools.values())))
    p_orig, p_unlearn = ctx.result.query(ctx.target, queried)
    verdicts, _ = infer_batch(ctx.classifier, p_orig, p_unlearn, ctx.target.labels[queried])
    lookup = dict(zip(queried.tolist(), verdicts.tolist()))
    result = tracker.run(
        "play_game",
        lambda: simulate_game(pools, lambda z: lookup[z], trials, derive_seed(seed, "challenger")),
        seed=seed,
    )
    logger.info("Juego: %d/%d aciertos (%.4f)", result.successes, result.trials, result.success_rate)
    directory = experiment_dir(cfg, output_root) / f"seed_{seed}"
    write_json({"config_digest": cfg.digest(), "seed": seed, **result.to_dict()}, directory / "game.json")
    tracker.write(directory.parent / "diagnostics.json")
    return result
