"""Scalar root finding and a cancellation-safe quadratic root."""

from __future__ import annotations

import math
from typing import Callable

from scipy import optimize

from ..core.errors import BracketingError, DomainError


def find_root_bisect(g: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Bisect g on [lo, hi] until the bracket is narrower than ``tol``.

    Raises:
        BracketingError: if g(lo) and g(hi) have the same strict sign
    """
    if not lo < hi:
        raise BracketingError(f"empty bracket [{lo}, {hi}]")
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise BracketingError(f"g does not change sign on [{lo}, {hi}]: g(lo)={g_lo}, g(hi)={g_hi}")
    return float(optimize.bisect(g, lo, hi, xtol=tol, maxiter=500))


def solve_quadratic_lower_root(a: float, b: float, c: float) -> float:
    """Root (−b − √(b²−4ac))/(2a) of aX² + bX + c = 0.

    For b < 0 the same root is taken from c/(aX₊) to avoid cancellation.
    """
    if a == 0:
        raise DomainError("leading coefficient is zero; use the linear solution")
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise DomainError(f"negative discriminant {disc}")
    sq = math.sqrt(disc)
    if b < 0:
        return 2.0 * c / (-b + sq)
    return (-b - sq) / (2.0 * a)
