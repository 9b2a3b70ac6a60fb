"""Mean follow-up comparator: every subject is followed for the mean time.

Sizes use the variance under the null evaluated at the restricted maximum
likelihood rates, as in Zhu's NB sample size method. The comparator needs
a common dispersion and a common dropout hazard in both arms.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

from ..core.config import settings
from ..core.errors import InfeasibleDesignError, UnsupportedComparatorError
from ..core.models import ArmSpec, EffectMetric, FollowUpDesign, Hypothesis, HypothesisKind
from ..design.follow_up import follow_up_moments
from ..numeric.normal import normal_cdf, normal_quantile, z_two_sided
from ..numeric.roots import solve_quadratic_lower_root

logger = logging.getLogger(__name__)


def _require_common(arms: Sequence[ArmSpec]) -> None:
    control, active = arms
    if control.kappa != active.kappa:
        raise UnsupportedComparatorError("mean follow-up comparator needs a common kappa")
    if control.dropout_hazard != active.dropout_hazard:
        raise UnsupportedComparatorError("mean follow-up comparator needs a common dropout hazard")


def _require_ratio(hypothesis: Hypothesis) -> None:
    if hypothesis.metric is not EffectMetric.RATIO:
        raise UnsupportedComparatorError("mean follow-up comparator is defined on the rate ratio only")


def zhu_null_variance(
    kind: HypothesisKind, margin_ratio: float, arms: Sequence[ArmSpec], mean_t: float
) -> float:
    """Ṽ₀ = κ/(p₀p₁) + [1/(p₀λ̃₀) + 1/(p₁λ̃₁)]/ν at the restricted MLE λ̃₁ = M λ̃₀.

    Superiority pools the two rates instead of restricting them.
    """
    _require_common(arms)
    control, active = arms
    p0, p1 = control.allocation, active.allocation
    lambda0, lambda1 = control.rate, active.rate
    kappa = control.kappa

    if kind is HypothesisKind.SUPERIORITY:
        r0 = r1 = p0 * lambda0 + p1 * lambda1
    else:
        theta = p1 / p0
        m = margin_ratio
        c = lambda0 + theta * lambda1
        if kappa == 0:
            r0 = c / (1.0 + theta * m)
        else:
            a = -kappa * mean_t * m * (1.0 + theta)
            b = kappa * mean_t * (lambda0 * m + theta * lambda1) - (1.0 + theta * m)
            r0 = solve_quadratic_lower_root(a, b, c)
        r1 = r0 * m

    return kappa / (p0 * p1) + (1.0 / (p0 * r0) + 1.0 / (p1 * r1)) / mean_t


def _alternative_variance(arms: Sequence[ArmSpec], mean_t: float) -> float:
    """V₁ = Σ_g [κ + 1/(λ_g ν)]/p_g."""
    return sum((arm.kappa + 1.0 / (arm.rate * mean_t)) / arm.allocation for arm in arms)


def zhu_ni_size(
    target_power: float,
    arms: Sequence[ArmSpec],
    design: FollowUpDesign,
    hypothesis: Hypothesis,
    alpha: float,
) -> int:
    """⌈(z_{1−α/2}√Ṽ₀ + z_P√V₁)² / log²(M λ₀/λ₁)⌉."""
    _require_ratio(hypothesis)
    if hypothesis.is_equivalence:
        raise UnsupportedComparatorError("use zhu_equiv_size for equivalence")
    _require_common(arms)
    control, active = arms

    mean_t = follow_up_moments(design, control.dropout_hazard).mean_t
    margin = hypothesis.margin_ni
    distance = math.log(margin * control.rate / active.rate)
    if distance == 0:
        raise InfeasibleDesignError("true ratio equals the margin")

    v0 = zhu_null_variance(hypothesis.kind, margin, arms, mean_t)
    v1 = _alternative_variance(arms, mean_t)
    z, z_p = z_two_sided(alpha), normal_quantile(target_power)
    return math.ceil((z * math.sqrt(v0) + z_p * math.sqrt(v1)) ** 2 / distance**2)


def zhu_equiv_size(
    target_power: float,
    arms: Sequence[ArmSpec],
    design: FollowUpDesign,
    hypothesis: Hypothesis,
    alpha: float,
) -> int:
    """Step n up from the one-sided seed until the two-sided power reaches the target.

    The seed comes from the upper margin alone, and the search always takes
    at least one step past it.
    """
    _require_ratio(hypothesis)
    if not hypothesis.is_equivalence:
        raise UnsupportedComparatorError("use zhu_ni_size for non-inferiority")
    _require_common(arms)
    control, active = arms

    mean_t = follow_up_moments(design, control.dropout_hazard).mean_t
    upper, lower = hypothesis.margin_upper, hypothesis.margin_lower
    v0_plus = zhu_null_variance(HypothesisKind.EQUIVALENCE, upper, arms, mean_t)
    v0_minus = zhu_null_variance(HypothesisKind.EQUIVALENCE, lower, arms, mean_t)
    sd1 = math.sqrt(_alternative_variance(arms, mean_t))
    z, z_p = z_two_sided(alpha), normal_quantile(target_power)

    to_upper = math.log(upper * control.rate / active.rate)
    to_lower = math.log(active.rate / (lower * control.rate))
    n = math.ceil((z * math.sqrt(v0_plus) + z_p * sd1) ** 2 / to_upper**2)
    seed = n

    for _ in range(settings.zhu_max_steps):
        n += 1
        root_n = math.sqrt(n)
        power = (
            normal_cdf((root_n * to_lower - z * math.sqrt(v0_minus)) / sd1)
            + normal_cdf((root_n * to_upper - z * math.sqrt(v0_plus)) / sd1)
            - 1.0
        )
        if power >= target_power:
            logger.debug(f"zhu_equiv_size: seed={seed} n={n} power={power:.6f}")
            return n
    raise InfeasibleDesignError(f"comparator search exceeded {settings.zhu_max_steps} steps from n={seed}")
