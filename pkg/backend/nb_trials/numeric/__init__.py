"""Numerical primitives: normal distribution, quadrature and root finding."""

from .normal import normal_cdf, normal_quantile, z_two_sided
from .quadrature import QuadratureSpec, integrate
from .roots import find_root_bisect, solve_quadratic_lower_root

__all__ = [
    "normal_cdf",
    "normal_quantile",
    "z_two_sided",
    "QuadratureSpec",
    "integrate",
    "find_root_bisect",
    "solve_quadratic_lower_root",
]
