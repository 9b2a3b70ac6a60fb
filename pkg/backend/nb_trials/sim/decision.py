"""Wald intervals and the interval-versus-margin decision rule."""

from __future__ import annotations

import math

from ..core.errors import TrialValidationError
from ..core.models import EffectMetric, Hypothesis, HypothesisKind
from ..numeric.normal import z_two_sided
from .fitters import FitResult


def wald_interval(fit: FitResult, metric: EffectMetric, alpha: float) -> tuple[float, float]:
    """Level 1−α Wald interval of λ1/λ0 (exp of the log-scale interval) or of λ1−λ0.

    The difference uses the delta method: var(λ̂1−λ̂0) = λ̂1²var(γ̂1) + λ̂0²var(γ̂0).
    """
    z = z_two_sided(alpha)
    if metric is EffectMetric.RATIO:
        half = z * math.sqrt(fit.var_beta)
        return math.exp(fit.beta_hat - half), math.exp(fit.beta_hat + half)

    rate0, rate1 = fit.rate_hat
    var0, var1 = fit.var_gamma
    half = z * math.sqrt(rate1**2 * var1 + rate0**2 * var0)
    diff = rate1 - rate0
    return diff - half, diff + half


def decide_interval(ci: tuple[float, float], hypothesis: Hypothesis) -> bool:
    """True when the interval rejects H₀.

    Non-inferiority: the whole interval lies on the favourable side of the
    margin (below it when the margin exceeds the null value, above it
    otherwise). Superiority: the interval excludes the null value.
    Equivalence: the interval lies strictly inside the margins.
    """
    lower, upper = ci
    if hypothesis.kind is HypothesisKind.EQUIVALENCE:
        return hypothesis.margin_lower < lower and upper < hypothesis.margin_upper

    margin = hypothesis.margin_ni
    if hypothesis.kind is HypothesisKind.SUPERIORITY:
        return upper < margin or lower > margin

    null = 1.0 if hypothesis.metric is EffectMetric.RATIO else 0.0
    if margin > null:
        return upper < margin
    return lower > margin


def decide(fit: FitResult, hypothesis: Hypothesis, alpha: float) -> bool:
    """Wald test of one fitted trial."""
    if not fit.converged:
        raise TrialValidationError("decide needs a converged fit")
    return decide_interval(wald_interval(fit, hypothesis.metric, alpha), hypothesis)
