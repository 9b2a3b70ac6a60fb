"""Follow-up time moments under fixed-duration and staggered-accrual designs."""

from __future__ import annotations

import logging
import math

from scipy import special

from ..core.errors import DomainError
from ..core.models import FollowUpDesign, FollowUpMoments

logger = logging.getLogger(__name__)

# Limit switches: below these products the closed-form limits are used
ETA_ZERO_TOL = 1e-10
ETA_DELTA_TOL = 1e-8
DELTA_ZERO_TOL = 1e-12


def exp_tail(m: int, x: float) -> float:
    """1 − e^{−x} Σ_{k<m} x^k/k!, i.e. the regularized lower incomplete gamma P(m, x).

    Evaluated without cancellation for small |x| and for negative x, where
    scipy's ``gammainc`` is undefined.
    """
    if x >= 0:
        return float(special.gammainc(m, x))
    if x > -1.0:
        term = x**m / math.factorial(m)
        acc = term
        k = m
        while abs(term) > 1e-17 * abs(acc):
            k += 1
            term *= x / k
            acc += term
        return math.exp(-x) * acc
    return 1.0 - math.exp(-x) * sum(x**k / math.factorial(k) for k in range(m))


def dropout_proportion_to_hazard(w: float, tau: float) -> float:
    """Exponential dropout hazard δ that loses a fraction ``w`` of subjects by ``tau``."""
    if not 0.0 <= w < 1.0:
        raise DomainError(f"dropout proportion must satisfy 0 <= w < 1, got {w}")
    if tau <= 0:
        raise DomainError(f"horizon must be > 0, got {tau}")
    return -math.log1p(-w) / tau


def _entry_weight(design: FollowUpDesign) -> float:
    """η e^{−ητ_a}/(1 − e^{−ητ_a}); the normalising constant of the entry density."""
    x = design.eta * design.tau_a
    return design.eta * math.exp(-x) / exp_tail(1, x)


def _staggered_h(design: FollowUpDesign, delta: float) -> tuple[float, float]:
    """h₁ = E[e^{−δ(τ_a−e)}] and h₂ = E[(τ_a−e)e^{−δ(τ_a−e)}] over the entry time e."""
    tau_a, eta = design.tau_a, design.eta
    if abs(eta) * tau_a < ETA_ZERO_TOL:
        y = delta * tau_a
        return exp_tail(1, y) / y, exp_tail(2, y) / (delta * y)
    temp = _entry_weight(design)
    gap = delta - eta
    if abs(gap) * tau_a < ETA_DELTA_TOL:
        return temp * tau_a, temp * tau_a**2 / 2.0
    y = gap * tau_a
    return temp * exp_tail(1, y) / gap, temp * exp_tail(2, y) / gap**2


def _staggered_no_dropout(design: FollowUpDesign) -> tuple[float, float]:
    tau_a, tau_c, eta = design.tau_a, design.tau_c, design.eta
    tau = design.total_duration
    if abs(eta) * tau_a < ETA_ZERO_TOL:
        return tau_c + tau_a / 2.0, (tau_c + tau_a) * tau_c + tau_a**2 / 3.0
    x = eta * tau_a
    denom = exp_tail(1, x)
    mean_entry = exp_tail(2, x) / denom / eta
    mean_entry2 = 2.0 * exp_tail(3, x) / denom / eta**2
    return tau - mean_entry, tau**2 - 2.0 * mean_entry * tau + mean_entry2


def follow_up_moments(design: FollowUpDesign, dropout_hazard: float) -> FollowUpMoments:
    """E(t), E(t²), t_m and CV of the follow-up time for one arm."""
    if dropout_hazard < 0:
        raise DomainError(f"dropout hazard must be >= 0, got {dropout_hazard}")
    delta = dropout_hazard
    tau_c = design.tau_c

    if not design.is_staggered:
        if delta * tau_c < DELTA_ZERO_TOL:
            mean_t, mean_t2 = tau_c, tau_c**2
        else:
            x = delta * tau_c
            mean_t = exp_tail(1, x) / delta
            mean_t2 = 2.0 * exp_tail(2, x) / delta**2
    elif delta * design.total_duration < DELTA_ZERO_TOL:
        mean_t, mean_t2 = _staggered_no_dropout(design)
    else:
        h1, h2 = _staggered_h(design, delta)
        decay = math.exp(-delta * tau_c)
        mean_t = (1.0 - decay * h1) / delta
        mean_t2 = 2.0 * (1.0 - ((delta * tau_c + 1.0) * h1 + delta * h2) * decay) / delta**2

    variance = max(mean_t2 - mean_t**2, 0.0)
    moments = FollowUpMoments(
        mean_t=mean_t,
        mean_t2=mean_t2,
        max_t=design.total_duration,
        cv=math.sqrt(variance) / mean_t,
    )
    logger.debug(f"follow-up moments for {design.kind.value}, δ={delta}: {moments}")
    return moments
