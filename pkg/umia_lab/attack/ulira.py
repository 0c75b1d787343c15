"""Example-level tri-class likelihood-ratio attack over shadow trials.

Each shadow trial trains an original model on a random half of the
population, unlearns one example and records the logit-confidence change
``phi(f_unlearned) - phi(f_original)`` of one forget, one unseen and one
retain example. One Gaussian per membership class is fitted to those
changes; a target query is assigned to the class whose density is largest.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import logging
from typing import Callable, Sequence

import numpy as np
from scipy.stats import norm

from umia_lab.core.config import FORGET, NUMERIC, RETAIN, UNSEEN
from umia_lab.core.errors import ConfigurationError, DataError
from umia_lab.core.seeding import derive_seed, rng_for
from umia_lab.models import Dataset, GaussianFit, MembershipSplit, UliraFit
from umia_lab.pipeline import PipelineResult, PipelineSpec, run_pipeline


logger = logging.getLogger(__name__)

# one trial: seed -> (forget, unseen, retain) observations
ShadowRunner = Callable[[int], tuple[float, float, float]]


def phi(probs: np.ndarray, labels: np.ndarray | int) -> np.ndarray:
    """Logit of the true-label probability, clamped to ``[1e-9, 1 - 1e-9]``."""

    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    p_y = np.clip(probs[np.arange(probs.shape[0]), labels], NUMERIC.logit_clamp, 1.0 - NUMERIC.logit_clamp)
    return np.log(p_y) - np.log1p(-p_y)


def fit_gaussian(observations: Sequence[float] | np.ndarray) -> GaussianFit:
    """Mean and Bessel-corrected standard deviation, floored at ``1e-6``."""

    values = np.asarray(observations, dtype=np.float64)
    if values.size < 2:
        raise ConfigurationError(f"a Gaussian fit needs at least two observations, got {values.size}")
    if not np.isfinite(values).all():
        raise DataError("observations must be finite")
    return GaussianFit(mean=float(values.mean()), std=max(float(values.std(ddof=1)), NUMERIC.std_floor))


def ulira_fit(shadow_runner: ShadowRunner, num_shadow: int, seed: int, workers: int = 1) -> UliraFit:
    if num_shadow < 2:
        raise ConfigurationError(f"TC-ULiRA needs at least two shadow trials, got {num_shadow}")
    seeds = [derive_seed(seed, "ulira-trial", t) for t in range(num_shadow)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        observations = np.array(list(pool.map(shadow_runner, seeds)), dtype=np.float64)
    fit = UliraFit(
        forget_gauss=fit_gaussian(observations[:, 0]),
        unseen_gauss=fit_gaussian(observations[:, 1]),
        retain_gauss=fit_gaussian(observations[:, 2]),
        num_shadow=num_shadow,
    )
    logger.info("Ajuste TC-ULiRA con %d ensayos sombra: %s", num_shadow, fit.to_dict())
    return fit


def ulira_log_densities(fit: UliraFit, observations: np.ndarray) -> np.ndarray:
    """``(n, 3)`` log densities in forget, unseen, retain order; finite where ``pdf`` underflows."""

    o = np.atleast_1d(np.asarray(observations, dtype=np.float64))
    return np.stack(
        [norm.logpdf(o, loc=g.mean, scale=g.std) for g in (fit.forget_gauss, fit.unseen_gauss, fit.retain_gauss)],
        axis=1,
    )


def ulira_classify_batch(fit: UliraFit, observations: np.ndarray) -> np.ndarray:
    dens = ulira_log_densities(fit, observations)
    l_forget, l_unseen, l_retain = dens[:, 0], dens[:, 1], dens[:, 2]
    is_forget = l_forget >= np.maximum(l_unseen, l_retain)
    is_unseen = ~is_forget & (l_unseen >= l_retain)
    return np.where(is_forget, FORGET, np.where(is_unseen, UNSEEN, RETAIN)).astype(np.int64)


def ulira_classify(fit: UliraFit, observation: float) -> int:
    """Forget if its density is maximal, else unseen if maximal, else retain."""

    return int(ulira_classify_batch(fit, np.array([observation]))[0])


def ulira_observations(result: PipelineResult, data: Dataset, indices: np.ndarray) -> np.ndarray:
    """Logit-confidence change of the unlearned over the original model for ``indices``."""

    indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    p_orig, p_unlearn = result.query(data, indices)
    labels = data.labels[indices]
    return phi(p_unlearn, labels) - phi(p_orig, labels)


def single_forget_split(population: Dataset, train_fraction: float, seed: int) -> MembershipSplit:
    """Random ``train_fraction`` of the population as training data with one example forgotten."""

    n = len(population)
    n_train = int(round(train_fraction * n))
    if not 2 <= n_train <= n - 1:
        raise ConfigurationError(f"train_fraction {train_fraction} on {n} examples leaves an empty pool")
    rng = rng_for(seed, "ulira-split")
    order = rng.permutation(n)
    train = np.sort(order[:n_train])
    test = np.sort(order[n_train:])
    forget = rng.choice(train, size=1)
    return MembershipSplit(train=train, test=test, forget=forget, retain=np.setdiff1d(train, forget), unseen=test)


def make_shadow_runner(population: Dataset, spec: PipelineSpec, train_fraction: float = 0.5) -> ShadowRunner:
    """Shadow trial on ``population`` under the same pipeline (architecture, unlearning, defense) as the target."""

    def run_trial(trial_seed: int) -> tuple[float, float, float]:
        split = single_forget_split(population, train_fraction, trial_seed)
        result = run_pipeline(population, split, spec, trial_seed)
        rng = rng_for(trial_seed, "ulira-pick")
        picked = np.array([split.forget[0], rng.choice(split.unseen), rng.choice(split.retain)])
        forget_o, unseen_o, retain_o = ulira_observations(result, population, picked)
        logger.debug("Ensayo TC-ULiRA: o = (%.4f, %.4f, %.4f)", forget_o, unseen_o, retain_o)
        return float(forget_o), float(unseen_o), float(retain_o)

    return run_trial


def ulira_attack(fit: UliraFit, result: PipelineResult, data: Dataset, indices: np.ndarray) -> np.ndarray:
    """Membership verdicts for target queries ``indices``."""

    return ulira_classify_batch(fit, ulira_observations(result, data, indices))
