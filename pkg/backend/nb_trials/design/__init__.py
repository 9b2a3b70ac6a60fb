"""Follow-up designs, follow-up moments and per-subject information."""

from .follow_up import dropout_proportion_to_hazard, exp_tail, follow_up_moments
from .information import (
    at_risk_probability,
    coarse_upper_size_increment,
    info_quantities,
    information_bounds,
)

__all__ = [
    "dropout_proportion_to_hazard",
    "exp_tail",
    "follow_up_moments",
    "at_risk_probability",
    "coarse_upper_size_increment",
    "info_quantities",
    "information_bounds",
]
