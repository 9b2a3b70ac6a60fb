"""Monte Carlo trial simulator and the NB / quasi-Poisson fitters it uses."""

from .decision import decide, decide_interval, wald_interval
from .fitters import (
    ArmFit,
    FitResult,
    fit_nb,
    fit_nb_arm,
    fit_nb_arm_arrays,
    fit_nb_arrays,
    fit_quasi_poisson,
    fit_quasi_poisson_arrays,
)
from .rng import ReplicationStreams, make_streams
from .runner import default_dispersion_mode, monte_carlo, null_rates, simulate_trial
from .sampler import ArmSample, SubjectRecord, sample_arm, sample_subject

__all__ = [
    "decide",
    "decide_interval",
    "wald_interval",
    "ArmFit",
    "FitResult",
    "fit_nb",
    "fit_nb_arm",
    "fit_nb_arm_arrays",
    "fit_nb_arrays",
    "fit_quasi_poisson",
    "fit_quasi_poisson_arrays",
    "ReplicationStreams",
    "make_streams",
    "default_dispersion_mode",
    "monte_carlo",
    "null_rates",
    "simulate_trial",
    "ArmSample",
    "SubjectRecord",
    "sample_arm",
    "sample_subject",
]
