"""Effect size, margin distances and unit-n variance on either metric."""

from __future__ import annotations

import math
from typing import Sequence

from ..core.errors import TrialValidationError
from ..core.models import (
    ArmSpec,
    EffectMetric,
    EffectSummary,
    Hypothesis,
    HypothesisKind,
    InfoBound,
    InfoQuantities,
)


def translate_margin(ratio_margin: float, lambda0: float, lambda1: float) -> float:
    """Difference-scale margin √(λ0λ1)·log(M) matching a ratio-scale margin."""
    if ratio_margin <= 0:
        raise TrialValidationError(f"ratio margin must be > 0, got {ratio_margin}")
    if lambda0 <= 0 or lambda1 <= 0:
        raise TrialValidationError("event rates must be > 0")
    return math.sqrt(lambda0 * lambda1) * math.log(ratio_margin)


def check_hypothesis(hypothesis: Hypothesis, lambda0: float, lambda1: float) -> None:
    """Reject rate/margin combinations under which the test is undefined."""
    ratio = hypothesis.metric is EffectMetric.RATIO
    effect = lambda1 / lambda0 if ratio else lambda1 - lambda0

    if hypothesis.kind is HypothesisKind.SUPERIORITY:
        if lambda0 == lambda1:
            raise TrialValidationError("lambda0 & lambda1 should be different in a superiority trial")
        return

    if hypothesis.kind is HypothesisKind.NONINFERIORITY:
        margin = hypothesis.margin_ni
        null = 1.0 if ratio else 0.0
        if ratio and (margin <= 0 or effect == margin):
            raise TrialValidationError("NI RATIO margin must satisfy Mr0>0 & lambda1/lambda0 != Mr0")
        if not ratio and effect == margin:
            raise TrialValidationError("NI DIFF margin must satisfy lambda1-lambda0 != Md0")
        # margin above the null: the active arm must lie below it, and vice versa
        if (margin > null and effect > margin) or (margin < null and effect < margin):
            raise TrialValidationError(
                f"NI margin {margin} and true effect {effect:.6g} lie on the wrong side of each other"
            )
        return

    lower, upper = hypothesis.margin_lower, hypothesis.margin_upper
    if not lower < effect < upper:
        if ratio:
            raise TrialValidationError("Equivalence RATIO margin must satisfy Mrl < lambda1/lambda0 < Mru")
        raise TrialValidationError("Equivalence DIFF margin must satisfy Mdl < lambda1-lambda0 < Mdu")


def unit_variance(metric: EffectMetric, arms: Sequence[ArmSpec], d0: float, d1: float) -> float:
    """σ²: n·var of log(λ̂1/λ̂0) (ratio) or of λ̂1−λ̂0 (difference)."""
    control, active = arms
    if metric is EffectMetric.RATIO:
        return 1.0 / (d0 * control.allocation) + 1.0 / (d1 * active.allocation)
    return (
        control.rate**2 / (d0 * control.allocation)
        + active.rate**2 / (d1 * active.allocation)
    )


def effect_summary(
    arms: Sequence[ArmSpec],
    info: Sequence[InfoQuantities],
    hypothesis: Hypothesis,
    bound: InfoBound = InfoBound.EXACT,
) -> EffectSummary:
    """β, β* (or Δ_a, Δ_b) and σ² for a hypothesis on its metric.

    Args:
        arms: (control, active)
        info: Information quantities of (control, active)
        hypothesis: Objective and margins
        bound: Which d enters σ²; the two bound variances are always attached

    Returns:
        EffectSummary
    """
    control, active = arms
    lambda0, lambda1 = control.rate, active.rate
    check_hypothesis(hypothesis, lambda0, lambda1)

    metric = hypothesis.metric
    ratio = metric is EffectMetric.RATIO
    beta = math.log(lambda1 / lambda0) if ratio else lambda1 - lambda0

    def on_scale(margin: float) -> float:
        return math.log(margin) if ratio else margin

    fields: dict = {}
    if hypothesis.is_equivalence:
        fields["delta_a"] = on_scale(hypothesis.margin_upper) - beta
        fields["delta_b"] = on_scale(hypothesis.margin_lower) - beta
    else:
        fields["beta_star"] = on_scale(hypothesis.margin_ni) - beta

    info0, info1 = info
    return EffectSummary(
        kind=hypothesis.kind,
        metric=metric,
        beta=beta,
        sigma2=unit_variance(metric, arms, info0.select(bound), info1.select(bound)),
        sigma2_at_d_upper=unit_variance(metric, arms, info0.d_upper, info1.d_upper),
        sigma2_at_d_lower=unit_variance(metric, arms, info0.d_lower, info1.d_lower),
        control_allocation=control.allocation,
        **fields,
    )
