"""Back-calculation of the NB dispersion κ from published trial summaries."""

from __future__ import annotations

import logging
import math
import warnings
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.errors import DomainError, MissingSummaryError, UnderdispersionWarning
from ..numeric.normal import z_two_sided

logger = logging.getLogger(__name__)


class PublishedArmSummary(BaseModel):
    """What a publication typically reports about one arm."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., gt=0, description="Subjects analysed")
    mean_events: float = Field(..., gt=0, description="Observed mean events per subject (≈ λ̂t̄)")
    mean_followup: float = Field(..., gt=0, description="Mean follow-up t̄")
    max_followup: float = Field(..., gt=0, description="Maximum follow-up t_m")
    rate_ci: Optional[tuple[float, float]] = Field(None, description="CI of the event rate")

    @model_validator(mode="after")
    def _check(self) -> "PublishedArmSummary":
        if self.mean_followup > self.max_followup:
            raise ValueError("mean follow-up cannot exceed the maximum follow-up")
        if self.rate_ci is not None:
            _check_ci(self.rate_ci)
        return self

    @property
    def rate(self) -> float:
        """λ̂ estimated as mean events over mean follow-up."""
        return self.mean_events / self.mean_followup


class KappaInterval(BaseModel):
    """Range of κ consistent with a reported confidence interval."""

    lower: float = Field(..., ge=0)
    upper: float = Field(..., ge=0)
    clipped: bool = Field(default=False, description="A negative bound was raised to 0")

    @model_validator(mode="after")
    def _check_order(self) -> "KappaInterval":
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        return self


def _check_ci(ci: tuple[float, float]) -> None:
    lo, hi = ci
    if not 0 < lo <= hi:
        raise ValueError(f"CI bounds must be positive and ordered, got {ci}")


def log_ci_variance(ci: tuple[float, float], alpha: float) -> float:
    """Variance of the log-scale estimate behind a Wald CI reported on the natural scale."""
    _check_ci(ci)
    lo, hi = ci
    return ((math.log(hi) - math.log(lo)) / (2.0 * z_two_sided(alpha))) ** 2


def _clipped_interval(lower: float, upper: float) -> KappaInterval:
    clipped = lower < 0 or upper < 0
    if clipped:
        logger.warning(f"Back-calculated κ bounds ({lower:.4f}, {upper:.4f}) clipped at 0")
    lower, upper = max(lower, 0.0), max(upper, 0.0)
    return KappaInterval(lower=min(lower, upper), upper=upper, clipped=clipped)


def kappa_from_rate_ci(arm: PublishedArmSummary, alpha: float = 0.05) -> KappaInterval:
    """(n V̂ − 1/(λ̂ t̄)) t̄/t_m ≤ κ ≤ n V̂ − 1/(λ̂ t̄) from one arm's rate CI.

    The bounds invert λ̂t̄/(1 + κλ̂t_m) ≤ d ≤ λ̂t̄/(1 + κλ̂t̄), with λ̂t̄ taken as
    the observed mean event count.
    """
    if arm.rate_ci is None:
        raise MissingSummaryError("arm summary has no rate CI")
    excess = arm.n * log_ci_variance(arm.rate_ci, alpha) - 1.0 / arm.mean_events
    lower = excess * arm.mean_followup / arm.max_followup
    upper = excess
    return _clipped_interval(lower, upper)


def _poisson_part(arms: Sequence[PublishedArmSummary]) -> float:
    return sum(1.0 / (arm.n * arm.mean_events) for arm in arms)


def kappa_from_ratio_ci(
    arms: Sequence[PublishedArmSummary], ratio_ci: tuple[float, float], alpha: float = 0.05
) -> KappaInterval:
    """κ range from a reported CI of λ1/λ0.

    Args:
        arms: (control, active) summaries
        ratio_ci: CI of the rate ratio at level 1−α
        alpha: Two-sided level of the CI

    Returns:
        KappaInterval
    """
    excess = log_ci_variance(ratio_ci, alpha) - _poisson_part(arms)
    lower = excess / sum(arm.max_followup / (arm.n * arm.mean_followup) for arm in arms)
    upper = excess / sum(1.0 / arm.n for arm in arms)
    logger.debug(f"ratio CI back-calculation: excess variance {excess:.6g}")
    return _clipped_interval(lower, upper)


def phi_from_ratio_ci(
    arms: Sequence[PublishedArmSummary], ratio_ci: tuple[float, float], alpha: float = 0.05
) -> float:
    """Quasi-Poisson scale φ̂ implied by a rate ratio CI."""
    return log_ci_variance(ratio_ci, alpha) / _poisson_part(arms)


def overall_mean_events(arms: Sequence[PublishedArmSummary]) -> float:
    """μ̄ = Σ p_g λ̂_g t̄_g with p_g the observed allocation."""
    total = sum(arm.n for arm in arms)
    return sum(arm.n * arm.mean_events for arm in arms) / total


def pooled_event_rate(arms: Sequence[PublishedArmSummary]) -> float:
    """Total events over total follow-up time."""
    events = sum(arm.n * arm.mean_events for arm in arms)
    exposure = sum(arm.n * arm.mean_followup for arm in arms)
    return events / exposure


def _excess_dispersion(phi: float, divisor: float) -> float:
    if divisor <= 0:
        raise DomainError(f"divisor must be > 0, got {divisor}")
    if phi < 1:
        warnings.warn(f"φ̂={phi} < 1 indicates under-dispersion; κ set to 0", UnderdispersionWarning, stacklevel=3)
        return 0.0
    return (phi - 1.0) / divisor


def kappa_from_quasi_poisson(phi: float, mean_events_overall: float) -> float:
    """κ̂ = (φ̂ − 1)/μ̄."""
    return _excess_dispersion(phi, mean_events_overall)


def kappa_zhu_lakkis(phi: float, pooled_rate: float) -> float:
    """(φ̂ − 1)/λ̄ with the pooled rate; kept only for comparison, it ignores follow-up length."""
    return _excess_dispersion(phi, pooled_rate)
