"""Per-subject information d = E[λt/(1+κλt)] and its analytic bounds."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional

from ..core.errors import DomainError
from ..core.models import ArmSpec, FollowUpDesign, FollowUpMoments, InfoQuantities
from ..numeric.quadrature import QuadratureSpec, integrate
from .follow_up import ETA_ZERO_TOL, exp_tail, follow_up_moments

logger = logging.getLogger(__name__)


def at_risk_probability(design: FollowUpDesign, dropout_hazard: float) -> Callable[[float], float]:
    """π(t) = P(follow-up ≥ t) for the design, as a function of t."""
    delta = dropout_hazard
    tau_c = design.tau_c
    if not design.is_staggered:
        return lambda t: math.exp(-delta * t)

    tau, tau_a, eta = design.total_duration, design.tau_a, design.eta
    if abs(eta) * tau_a < ETA_ZERO_TOL:
        def still_enrolled(t: float) -> float:
            return (tau - t) / tau_a
    else:
        norm = exp_tail(1, eta * tau_a)

        def still_enrolled(t: float) -> float:
            return exp_tail(1, eta * (tau - t)) / norm

    def pi(t: float) -> float:
        survival = math.exp(-delta * t)
        return survival if t <= tau_c else survival * still_enrolled(t)

    return pi


def information_bounds(arm: ArmSpec, moments: FollowUpMoments) -> tuple[float, float]:
    """(d_lower, d_upper) = (λν²/(ν + κλE(t²)), λν/(1 + κλν))."""
    lam, kappa, nu = arm.rate, arm.kappa, moments.mean_t
    d_lower = lam * nu**2 / (nu + kappa * lam * moments.mean_t2)
    d_upper = lam * nu / (1.0 + kappa * lam * nu)
    return d_lower, d_upper


def info_quantities(
    design: FollowUpDesign,
    arm: ArmSpec,
    spec: Optional[QuadratureSpec] = None,
) -> InfoQuantities:
    """Information d for one arm by quadrature, with its lower and upper bounds.

    Args:
        design: Accrual and censoring design
        arm: Rate, dispersion and dropout of the arm
        spec: Quadrature tolerances (settings defaults when omitted)

    Returns:
        InfoQuantities with d_lower <= d <= d_upper
    """
    lam, kappa, delta = arm.rate, arm.kappa, arm.dropout_hazard
    moments = follow_up_moments(design, delta)
    d_lower, d_upper = information_bounds(arm, moments)

    if kappa == 0:
        d = lam * moments.mean_t
        return InfoQuantities(d=d, d_lower=d, d_upper=d)

    tau_c = design.tau_c
    if not design.is_staggered and delta == 0:
        d = lam * tau_c / (1.0 + kappa * lam * tau_c)
        return InfoQuantities(d=d, d_lower=d_lower, d_upper=d_upper)

    pi = at_risk_probability(design, delta)

    def integrand(t: float) -> float:
        return lam * pi(t) / (1.0 + kappa * lam * t) ** 2

    d = integrate(integrand, 0.0, tau_c, spec)
    if design.is_staggered:
        d += integrate(integrand, tau_c, design.total_duration, spec)

    logger.debug(f"d={d:.10f} in [{d_lower:.10f}, {d_upper:.10f}] for λ={lam}, κ={kappa}, δ={delta}")
    return InfoQuantities(d=d, d_lower=d_lower, d_upper=d_upper)


def coarse_upper_size_increment(arm: ArmSpec, moments: FollowUpMoments, f: float) -> float:
    """κ f (t_m − ν)/ν, one arm's term of the design-free upper size bound."""
    if moments.mean_t <= 0:
        raise DomainError("mean follow-up must be > 0")
    if f <= 0:
        raise DomainError(f"size factor must be > 0, got {f}")
    return arm.kappa * f * (moments.max_t - moments.mean_t) / moments.mean_t
