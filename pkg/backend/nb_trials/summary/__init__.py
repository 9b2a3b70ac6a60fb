"""κ back-calculation from published summaries and the quasi-Poisson variance gap."""

from .back_calculation import (
    KappaInterval,
    PublishedArmSummary,
    kappa_from_quasi_poisson,
    kappa_from_rate_ci,
    kappa_from_ratio_ci,
    kappa_zhu_lakkis,
    log_ci_variance,
    overall_mean_events,
    phi_from_ratio_ci,
    pooled_event_rate,
)
from .variance_gap import quasi_poisson_variance_gap, rate_ratio_penalty

__all__ = [
    "KappaInterval",
    "PublishedArmSummary",
    "kappa_from_quasi_poisson",
    "kappa_from_rate_ci",
    "kappa_from_ratio_ci",
    "kappa_zhu_lakkis",
    "log_ci_variance",
    "overall_mean_events",
    "phi_from_ratio_ci",
    "pooled_event_rate",
    "quasi_poisson_variance_gap",
    "rate_ratio_penalty",
]
