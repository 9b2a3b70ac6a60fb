"""Monte Carlo estimation of type I error and power of the Wald tests."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from ..core.config import settings
from ..core.errors import BoundaryFitError, DomainError, TrialValidationError
from ..core.logfire_tracing import log_simulation_report, traced
from ..core.models import AnalysisModel, DispersionMode, EffectMetric, SimReport, TrialSpec
from ..sizing.power import split_total
from .decision import decide
from .fitters import fit_nb_arrays, fit_quasi_poisson_arrays
from .rng import make_streams
from .sampler import sample_arm

logger = logging.getLogger(__name__)

# (rejected or None on fit failure, Poisson fallback used)
Outcome = tuple[Optional[bool], bool]


def null_rates(trial: TrialSpec) -> tuple[float, float]:
    """True rates on the boundary of H₀: λ1 at the NI margin, or at the upper equivalence margin."""
    h = trial.hypothesis
    lambda0 = trial.control.rate
    margin = h.margin_upper if h.is_equivalence else h.margin_ni
    if h.metric is EffectMetric.RATIO:
        return lambda0, lambda0 * margin
    return lambda0, lambda0 + margin


def default_dispersion_mode(trial: TrialSpec) -> DispersionMode:
    if trial.control.kappa == trial.active.kappa:
        return DispersionMode.COMMON
    return DispersionMode.PER_ARM


def simulate_trial(
    trial: TrialSpec,
    n_per_arm: tuple[int, int],
    master_seed: int,
    replication: int,
    analysis: AnalysisModel = AnalysisModel.NB,
    dispersion_mode: DispersionMode = DispersionMode.COMMON,
) -> Outcome:
    """Generate, fit and test one trial."""
    streams = make_streams(master_seed, replication)
    samples = [
        sample_arm(trial.design, spec, size, streams.for_arm(g), arm_index=g)
        for g, (spec, size) in enumerate(zip(trial.arms, n_per_arm))
    ]
    arm = np.concatenate([np.full(s.size, s.arm) for s in samples])
    follow_up = np.concatenate([s.follow_up for s in samples])
    events = np.concatenate([s.events for s in samples])

    try:
        if analysis is AnalysisModel.QUASI_POISSON:
            fit = fit_quasi_poisson_arrays(arm, follow_up, events)
        else:
            fit = fit_nb_arrays(arm, follow_up, events, dispersion_mode)
    except (BoundaryFitError, DomainError, np.linalg.LinAlgError) as e:
        logger.debug(f"replication {replication}: fit failed: {e}")
        return None, False

    if not fit.converged:
        logger.debug(f"replication {replication}: fit did not converge after {fit.iterations} iterations")
        return None, fit.poisson_fallback
    return decide(fit, trial.hypothesis, trial.alpha), fit.poisson_fallback


def _run_chunk(
    trial: TrialSpec,
    n_per_arm: tuple[int, int],
    master_seed: int,
    start: int,
    stop: int,
    analysis: AnalysisModel,
    dispersion_mode: DispersionMode,
) -> list[Outcome]:
    return [
        simulate_trial(trial, n_per_arm, master_seed, rep, analysis, dispersion_mode)
        for rep in range(start, stop)
    ]


@traced("monte_carlo")
def monte_carlo(
    trial: TrialSpec,
    n: int,
    truth: Optional[tuple[float, float]] = None,
    replications: Optional[int] = None,
    seed: Optional[int] = None,
    analysis: AnalysisModel = AnalysisModel.NB,
    dispersion_mode: Optional[DispersionMode] = None,
    workers: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> SimReport:
    """Simulate ``replications`` trials of total size n and count rejections.

    Replication r draws from streams seeded by (seed, r) alone, so the report
    does not depend on the worker count or chunking.

    Args:
        trial: Design, arms, hypothesis and level of the analysis
        n: Total sample size, split between arms by largest remainder
        truth: True (λ0, λ1); defaults to the rates in ``trial``
        replications: Number of simulated trials
        seed: Master seed
        analysis: NB maximum likelihood or quasi-Poisson
        dispersion_mode: NB κ shared or per arm; defaults to shared when the arms' κ agree
        workers: joblib worker processes
        chunk_size: Replications per task

    Returns:
        SimReport with fit failures excluded from the rate's denominator
    """
    replications = settings.sim_replications if replications is None else replications
    seed = settings.sim_seed if seed is None else seed
    workers = settings.sim_workers if workers is None else workers
    chunk_size = settings.sim_chunk_size if chunk_size is None else chunk_size
    if replications < 1:
        raise TrialValidationError(f"replications must be >= 1, got {replications}")

    n_per_arm = split_total(n, trial.control.allocation)
    if min(n_per_arm) < 1:
        raise TrialValidationError(f"n={n} leaves an arm without subjects")
    if truth is not None:
        if min(truth) <= 0:
            raise TrialValidationError(f"true rates must be > 0, got {truth}")
        trial = trial.with_rates(*truth)
    mode = dispersion_mode or default_dispersion_mode(trial)

    bounds = [(s, min(s + chunk_size, replications)) for s in range(0, replications, chunk_size)]
    args = (trial, n_per_arm, seed)
    if workers == 1:
        chunks = [_run_chunk(*args, start, stop, analysis, mode) for start, stop in bounds]
    else:
        chunks = Parallel(n_jobs=workers)(
            delayed(_run_chunk)(*args, start, stop, analysis, mode) for start, stop in bounds
        )
    outcomes = [outcome for chunk in chunks for outcome in chunk]

    failures = sum(1 for rejected, _ in outcomes if rejected is None)
    rejections = sum(1 for rejected, _ in outcomes if rejected)
    fallbacks = sum(1 for _, fallback in outcomes if fallback)
    fitted = replications - failures
    if fitted == 0:
        logger.error(f"All {replications} simulated fits failed")
    rate = rejections / fitted if fitted else 0.0

    report = SimReport(
        replications=replications,
        rejections=rejections,
        rejection_rate=rate,
        mc_se=math.sqrt(rate * (1.0 - rate) / replications),
        fit_failures=failures,
        poisson_fallbacks=fallbacks,
        seed=seed,
        n=n,
        n_per_arm=n_per_arm,
        analysis=analysis,
    )
    if failures:
        logger.warning(f"{failures} of {replications} fits failed and were excluded")
    logger.info(
        f"Simulated {replications} trials (n={n}, λ=({trial.control.rate:g}, {trial.active.rate:g}), "
        f"{analysis.value}): rejection rate {rate:.4f} ± {report.mc_se:.4f}"
    )
    log_simulation_report(
        f"{trial.hypothesis.kind.value}/{trial.hypothesis.metric.value}",
        report.model_dump(mode="json"),
    )
    return report
