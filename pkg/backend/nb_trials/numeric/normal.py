"""Standard normal distribution function and its inverse."""

from __future__ import annotations

import math

from scipy import special

from ..core.errors import DomainError


def normal_cdf(x: float) -> float:
    """Φ(x), accurate to about 1e-16 in absolute terms."""
    return float(special.ndtr(x))


def normal_quantile(p: float) -> float:
    """z_p with Φ(z_p) = p."""
    if not 0.0 < p < 1.0 or math.isnan(p):
        raise DomainError(f"quantile needs 0 < p < 1, got {p}")
    return float(special.ndtri(p))


def z_two_sided(alpha: float) -> float:
    """z_{1−α/2}, the critical value of a two-sided level-α Wald test."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return normal_quantile(1.0 - alpha / 2.0)
