"""Power and sample size for non-inferiority, superiority and equivalence."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional

from ..core.config import settings
from ..core.errors import InfeasibleDesignError, TrialValidationError
from ..core.models import EffectSummary, HypothesisKind, RoundingMode, SizingResult
from ..numeric.normal import normal_cdf, normal_quantile, z_two_sided
from ..numeric.roots import find_root_bisect

logger = logging.getLogger(__name__)

# Δ_a and −Δ_b closer than this are treated as symmetric margins
SYMMETRY_TOL = 1e-12


# ============================================================================
# Rounding
# ============================================================================


def split_total(n: int, control_allocation: float) -> tuple[int, int]:
    """Split n subjects between arms by largest remainder (ties go to control)."""
    quota0 = n * control_allocation
    quota1 = n - quota0
    n0, n1 = math.floor(quota0), math.floor(quota1)
    if n0 + n1 < n:
        if quota0 - n0 >= quota1 - n1:
            n0 += 1
        else:
            n1 += 1
    return n0, n1


def round_size(n_raw: float, control_allocation: float, mode: RoundingMode) -> tuple[int, tuple[int, int]]:
    """Whole-subject size for a real n_raw: total ceiling or per-arm ceilings."""
    if mode is RoundingMode.PER_ARM:
        per_arm = (
            math.ceil(n_raw * control_allocation),
            math.ceil(n_raw * (1.0 - control_allocation)),
        )
        return sum(per_arm), per_arm
    n = math.ceil(n_raw)
    return n, split_total(n, control_allocation)


def _smallest_feasible(n: int, power: Callable[[float], float], target: float) -> int:
    while n > 1 and power(n - 1) >= target:
        n -= 1
    while power(n) < target:
        n += 1
    return n


# ============================================================================
# Non-inferiority and superiority
# ============================================================================


def ni_power(n: float, eff: EffectSummary, alpha: float) -> float:
    """Φ(√n|β*|/σ − z_{1−α/2})."""
    if eff.beta_star is None:
        raise TrialValidationError("ni_power needs a non-inferiority effect summary")
    return normal_cdf(math.sqrt(n) * abs(eff.beta_star) / math.sqrt(eff.sigma2) - z_two_sided(alpha))


def ni_size_factor(target_power: float, eff: EffectSummary, alpha: float) -> float:
    """f = (z_{1−α/2} + z_P)²/β*², so that n_raw = σ² f."""
    if not 0 < target_power < 1:
        raise TrialValidationError(f"target power must lie in (0, 1), got {target_power}")
    if eff.beta_star is None:
        raise TrialValidationError("ni_size needs a non-inferiority effect summary")
    if eff.beta_star == 0:
        raise InfeasibleDesignError("true effect equals the margin; no sample size reaches the power")
    return (z_two_sided(alpha) + normal_quantile(target_power)) ** 2 / eff.beta_star**2


def ni_size(
    target_power: float,
    eff: EffectSummary,
    alpha: float,
    rounding: RoundingMode = RoundingMode.TOTAL,
) -> SizingResult:
    """Closed-form total size; superiority is the M_r0 = 1 / M_d0 = 0 case."""
    f = ni_size_factor(target_power, eff, alpha)
    p0 = eff.control_allocation

    n_raw = eff.sigma2 * f
    n, per_arm = round_size(n_raw, p0, rounding)
    n_lower, _ = round_size((eff.sigma2_at_d_upper or eff.sigma2) * f, p0, rounding)
    n_upper, _ = round_size((eff.sigma2_at_d_lower or eff.sigma2) * f, p0, rounding)

    logger.debug(f"ni_size: n_raw={n_raw:.6f} n={n} bounds=({n_lower}, {n_upper})")
    return SizingResult(
        n_raw=n_raw,
        n=n,
        n_lower=n_lower,
        n_upper=n_upper,
        n_per_arm=per_arm,
        nominal_power_at_n=ni_power(n, eff, alpha),
        target_power=target_power,
        rounding=rounding,
    )


# ============================================================================
# Equivalence
# ============================================================================


def _equiv_power_unfloored(n: float, eff: EffectSummary, alpha: float, sigma2: float) -> float:
    z = z_two_sided(alpha)
    sd = math.sqrt(sigma2)
    root_n = math.sqrt(n)
    return normal_cdf(root_n * eff.delta_a / sd - z) + normal_cdf(-root_n * eff.delta_b / sd - z) - 1.0


def equiv_power(n: float, eff: EffectSummary, alpha: float) -> float:
    """Power of the two one-sided tests, floored at 0."""
    if eff.kind is not HypothesisKind.EQUIVALENCE:
        raise TrialValidationError("equiv_power needs an equivalence effect summary")
    return max(_equiv_power_unfloored(n, eff, alpha, eff.sigma2), 0.0)


def equiv_size_bracket(
    target_power: float, eff: EffectSummary, alpha: float, sigma2: Optional[float] = None
) -> tuple[float, float]:
    """Closed-form sizes with Δ_max and Δ_min; the real-valued size lies between them."""
    sigma2 = eff.sigma2 if sigma2 is None else sigma2
    z = z_two_sided(alpha)
    z_half = normal_quantile((1.0 + target_power) / 2.0)
    near, far = sorted((eff.delta_a, -eff.delta_b))
    scale = sigma2 * (z + z_half) ** 2
    return scale / far**2, scale / near**2


def equiv_size_by_bisection(
    target_power: float,
    eff: EffectSummary,
    alpha: float,
    sigma2: Optional[float] = None,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    tol: Optional[float] = None,
) -> float:
    """Real n solving equivalence power = target, by bisection on [lo, hi].

    The bracket defaults to ``equiv_size_bracket``.
    """
    sigma2 = eff.sigma2 if sigma2 is None else sigma2
    bracket_lo, bracket_hi = equiv_size_bracket(target_power, eff, alpha, sigma2)
    lo = bracket_lo if lo is None else lo
    hi = bracket_hi if hi is None else hi
    tol = settings.equiv_bisect_tol if tol is None else tol
    return find_root_bisect(
        lambda n: _equiv_power_unfloored(n, eff, alpha, sigma2) - target_power, lo, hi, tol
    )


def _equiv_raw_size(target_power: float, eff: EffectSummary, alpha: float, sigma2: float) -> float:
    lo, hi = equiv_size_bracket(target_power, eff, alpha, sigma2)
    if abs(eff.delta_a + eff.delta_b) < SYMMETRY_TOL:
        return hi
    return equiv_size_by_bisection(target_power, eff, alpha, sigma2, lo, hi)


def _equiv_integer_size(
    n_raw: float, target_power: float, eff: EffectSummary, alpha: float, sigma2: float, rounding: RoundingMode
) -> tuple[int, tuple[int, int]]:
    p0 = eff.control_allocation
    n, per_arm = round_size(n_raw, p0, rounding)
    if rounding is RoundingMode.TOTAL:
        n = _smallest_feasible(
            n, lambda m: _equiv_power_unfloored(m, eff, alpha, sigma2), target_power
        )
        per_arm = split_total(n, p0)
    return n, per_arm


def equiv_size(
    target_power: float,
    eff: EffectSummary,
    alpha: float,
    rounding: RoundingMode = RoundingMode.TOTAL,
) -> SizingResult:
    """Smallest n whose equivalence power reaches the target.

    Symmetric margins (Δ_a = −Δ_b) use the closed form with z_{(1+P)/2};
    otherwise the power curve is inverted by bisection inside the
    closed-form bracket. Bounds rerun the inversion with d_upper and d_lower.
    """
    if not 0 < target_power < 1:
        raise TrialValidationError(f"target power must lie in (0, 1), got {target_power}")
    if eff.kind is not HypothesisKind.EQUIVALENCE:
        raise TrialValidationError("equiv_size needs an equivalence effect summary")

    n_raw = _equiv_raw_size(target_power, eff, alpha, eff.sigma2)
    n, per_arm = _equiv_integer_size(n_raw, target_power, eff, alpha, eff.sigma2, rounding)

    bounds = []
    for sigma2 in (eff.sigma2_at_d_upper or eff.sigma2, eff.sigma2_at_d_lower or eff.sigma2):
        raw = _equiv_raw_size(target_power, eff, alpha, sigma2)
        bounds.append(_equiv_integer_size(raw, target_power, eff, alpha, sigma2, rounding)[0])

    logger.debug(f"equiv_size: n_raw={n_raw:.6f} n={n} bounds={tuple(bounds)}")
    return SizingResult(
        n_raw=n_raw,
        n=n,
        n_lower=bounds[0],
        n_upper=bounds[1],
        n_per_arm=per_arm,
        nominal_power_at_n=equiv_power(n, eff, alpha),
        target_power=target_power,
        rounding=rounding,
    )
