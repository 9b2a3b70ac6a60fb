"""Power and sample size for NB rate comparisons."""

from .effect import check_hypothesis, effect_summary, translate_margin, unit_variance
from .planner import size_trial, trial_effect, trial_information, trial_power
from .power import (
    equiv_power,
    equiv_size,
    equiv_size_bracket,
    equiv_size_by_bisection,
    ni_power,
    ni_size,
    ni_size_factor,
    round_size,
    split_total,
)
from .zhu import zhu_equiv_size, zhu_ni_size, zhu_null_variance

__all__ = [
    "check_hypothesis",
    "effect_summary",
    "translate_margin",
    "unit_variance",
    "size_trial",
    "trial_effect",
    "trial_information",
    "trial_power",
    "equiv_power",
    "equiv_size",
    "equiv_size_bracket",
    "equiv_size_by_bisection",
    "ni_power",
    "ni_size",
    "ni_size_factor",
    "round_size",
    "split_total",
    "zhu_equiv_size",
    "zhu_ni_size",
    "zhu_null_variance",
]
