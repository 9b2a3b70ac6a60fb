"""Trial-level entry points: size or power a full TrialSpec."""

from __future__ import annotations

import logging
from typing import Optional

from ..core.config import settings
from ..core.errors import UnsupportedComparatorError
from ..core.logfire_tracing import traced
from ..core.models import (
    EffectMetric,
    EffectSummary,
    InfoBound,
    InfoQuantities,
    PowerResult,
    SizingResult,
    TrialSpec,
)
from ..design.follow_up import follow_up_moments
from ..design.information import coarse_upper_size_increment, info_quantities
from ..numeric.quadrature import QuadratureSpec
from .effect import effect_summary
from .power import equiv_power, equiv_size, ni_power, ni_size, ni_size_factor
from .zhu import zhu_equiv_size, zhu_ni_size

logger = logging.getLogger(__name__)


def trial_information(trial: TrialSpec, spec: Optional[QuadratureSpec] = None) -> tuple[InfoQuantities, InfoQuantities]:
    """Information quantities of (control, active)."""
    return (
        info_quantities(trial.design, trial.control, spec),
        info_quantities(trial.design, trial.active, spec),
    )


def trial_effect(
    trial: TrialSpec, bound: InfoBound = InfoBound.EXACT, spec: Optional[QuadratureSpec] = None
) -> EffectSummary:
    return effect_summary(trial.arms, trial_information(trial, spec), trial.hypothesis, bound)


def _comparator_size(trial: TrialSpec, target_power: float) -> Optional[int]:
    size = zhu_equiv_size if trial.hypothesis.is_equivalence else zhu_ni_size
    try:
        return size(target_power, trial.arms, trial.design, trial.hypothesis, trial.alpha)
    except UnsupportedComparatorError as e:
        logger.debug(f"Comparator skipped: {e}")
        return None


def _coarse_upper(trial: TrialSpec, eff: EffectSummary, target_power: float) -> Optional[float]:
    if trial.hypothesis.is_equivalence or trial.hypothesis.metric is not EffectMetric.RATIO:
        return None
    f = ni_size_factor(target_power, eff, trial.alpha)
    total = (eff.sigma2_at_d_upper or eff.sigma2) * f
    for arm in trial.arms:
        moments = follow_up_moments(trial.design, arm.dropout_hazard)
        total += coarse_upper_size_increment(arm, moments, f) / arm.allocation
    return total


@traced("size_trial")
def size_trial(
    trial: TrialSpec,
    target_power: Optional[float] = None,
    bound: InfoBound = InfoBound.EXACT,
    spec: Optional[QuadratureSpec] = None,
) -> SizingResult:
    """Sample size for a trial, with bounds and the mean follow-up comparator.

    Args:
        trial: Arms, design, hypothesis, level and rounding
        target_power: Required power P (NB_DEFAULT_POWER when omitted)
        bound: d used for the headline size (exact quadrature by default)
        spec: Quadrature tolerances

    Returns:
        SizingResult
    """
    target_power = settings.default_power if target_power is None else target_power
    eff = trial_effect(trial, bound, spec)
    if trial.hypothesis.is_equivalence:
        result = equiv_size(target_power, eff, trial.alpha, trial.rounding)
    else:
        result = ni_size(target_power, eff, trial.alpha, trial.rounding)

    result = result.model_copy(
        update={
            "n_zhu": _comparator_size(trial, target_power),
            "n_upper_coarse": _coarse_upper(trial, eff, target_power),
        }
    )
    logger.info(
        f"Sized {trial.hypothesis.kind.value}/{trial.hypothesis.metric.value} trial: "
        f"n={result.n} ({result.n_lower}-{result.n_upper}), n_raw={result.n_raw:.3f}"
    )
    return result


@traced("trial_power")
def trial_power(trial: TrialSpec, n: int, spec: Optional[QuadratureSpec] = None) -> PowerResult:
    """Nominal power at total size n, bracketed by the powers at d_lower and d_upper."""
    eff = trial_effect(trial, InfoBound.EXACT, spec)
    power = equiv_power if trial.hypothesis.is_equivalence else ni_power

    def at(sigma2: Optional[float]) -> float:
        return power(n, eff.model_copy(update={"sigma2": sigma2 or eff.sigma2}), trial.alpha)

    return PowerResult(
        n=n,
        power=power(n, eff, trial.alpha),
        power_lower=at(eff.sigma2_at_d_lower),
        power_upper=at(eff.sigma2_at_d_upper),
    )
