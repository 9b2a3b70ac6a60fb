"""How far the quasi-Poisson variance of log(λ̂1/λ̂0) falls below the NB truth."""

from __future__ import annotations

import logging
from typing import Sequence

from ..core.errors import DomainError
from ..core.models import ArmSpec, FollowUpMoments

logger = logging.getLogger(__name__)


def rate_ratio_penalty(lambda0: float, lambda1: float) -> float:
    """(λ0 − λ1)²/(2λ0λ1); zero under a superiority null."""
    if lambda0 <= 0 or lambda1 <= 0:
        raise DomainError("event rates must be > 0")
    return (lambda0 - lambda1) ** 2 / (2.0 * lambda0 * lambda1)


def quasi_poisson_variance_gap(
    arms: Sequence[ArmSpec], moments: FollowUpMoments, n_per_arm: int
) -> float:
    """Approximate var_true − var_poi ≈ (κ/n̄)[2CV² − (λ0−λ1)²/(2λ0λ1)].

    Assumes equal arm sizes, a common κ and a common follow-up distribution.
    A positive gap means the quasi-Poisson test is anti-conservative.
    """
    control, active = arms
    if moments.mean_t <= 0:
        raise DomainError("mean follow-up must be > 0")
    if n_per_arm < 1:
        raise DomainError(f"per-arm size must be >= 1, got {n_per_arm}")
    if control.kappa != active.kappa:
        raise DomainError("the variance gap assumes a common kappa")

    gap = control.kappa / n_per_arm * (
        2.0 * moments.cv**2 - rate_ratio_penalty(control.rate, active.rate)
    )
    logger.debug(f"quasi-Poisson variance gap {gap:.3g} (CV={moments.cv:.4f}, n̄={n_per_arm})")
    return gap
