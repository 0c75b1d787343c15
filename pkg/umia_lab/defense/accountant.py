"""Renyi-DP accounting for the Poisson-subsampled Gaussian mechanism."""

from __future__ import annotations

import logging
import math
from typing import Sequence

from dp_accounting import GaussianDpEvent, PoissonSampledDpEvent
from dp_accounting.rdp import RdpAccountant
from scipy import optimize

from umia_lab.core.config import PRIVACY
from umia_lab.core.errors import ConfigurationError


logger = logging.getLogger(__name__)


def rdp_accountant(
    sigma: float, steps: int, q: float, orders: Sequence[float] = PRIVACY.orders
) -> RdpAccountant:
    """Accountant holding ``steps`` compositions of one sampled Gaussian step, tracked on ``orders``."""

    step = PoissonSampledDpEvent(q, GaussianDpEvent(sigma))
    accountant = RdpAccountant(orders=list(orders))
    return accountant.compose(step, count=steps)


def _check_inputs(steps: int, q: float, delta: float) -> None:
    if not 0.0 < q <= 1.0:
        raise ConfigurationError(f"sampling rate q must lie in (0, 1], got {q}")
    if steps < 1:
        raise ConfigurationError(f"steps must be >= 1, got {steps}")
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")


def compute_epsilon(
    sigma: float,
    steps: int,
    q: float,
    delta: float,
    orders: Sequence[float] = PRIVACY.orders,
) -> float:
    """Smallest epsilon over the order grid after ``steps`` compositions."""

    _check_inputs(steps, q, delta)
    if sigma < 0:
        raise ConfigurationError(f"noise multiplier must be >= 0, got {sigma}")
    if sigma == 0:
        logger.warning("Multiplicador de ruido 0: epsilon infinito")
        return math.inf
    epsilon, order = rdp_accountant(sigma, steps, q, orders).get_epsilon_and_optimal_order(delta)
    logger.debug("epsilon=%.4f (orden %s, sigma=%.4f, q=%.5f, pasos=%d)", epsilon, order, sigma, q, steps)
    return float(epsilon)


def calibrate_sigma(
    target_epsilon: float,
    steps: int,
    q: float,
    delta: float,
    orders: Sequence[float] = PRIVACY.orders,
    bracket: tuple[float, float] = (0.05, 500.0),
) -> float:
    """Noise multiplier whose epsilon matches ``target_epsilon`` (Brent's method over log sigma)."""

    if not target_epsilon > 0:
        raise ConfigurationError(f"target epsilon must be positive, got {target_epsilon}")
    _check_inputs(steps, q, delta)
    low, high = bracket

    def gap(log_sigma: float) -> float:
        return compute_epsilon(math.exp(log_sigma), steps, q, delta, orders) - target_epsilon

    if gap(math.log(high)) > 0:
        raise ConfigurationError(f"epsilon {target_epsilon} unattainable even with sigma={high}")
    if gap(math.log(low)) < 0:
        raise ConfigurationError(f"epsilon {target_epsilon} is looser than sigma={low} already gives")
    solution = optimize.root_scalar(gap, bracket=[math.log(low), math.log(high)], method="brentq", xtol=1e-8)
    sigma = math.exp(solution.root)
    logger.info("Calibrado sigma=%.4f para epsilon=%.2f (q=%.5f, pasos=%d)", sigma, target_epsilon, q, steps)
    return sigma
