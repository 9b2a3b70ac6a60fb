"""Maximum likelihood NB and quasi-Poisson fits of two-arm and single-arm count data.

The NB log-likelihood of a subject with follow-up t, count y and rate
exp(γ) is

    Σ_{k<y} log(1 + kκ) − log y! + y log μ − (y + 1/κ) log(1 + κμ),  μ = exp(γ)t

written with the finite sum in place of the gamma function ratio so that
it stays accurate as κ approaches the Poisson boundary. The fit runs on
(γ₀, γ₁, log κ), or (γ, log κ) for one arm, with analytic gradient and
Hessian.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import optimize, special

from ..core.config import settings
from ..core.errors import BoundaryFitError, DomainError
from ..core.models import DispersionMode
from .sampler import SubjectRecord

logger = logging.getLogger(__name__)

# Starting κ when the moment estimate is not positive
KAPPA_START_FLOOR = 0.05


class FitResult(BaseModel):
    """Estimates from one fitted trial."""

    gamma_hat: tuple[float, float] = Field(..., description="Log event rates (control, active)")
    kappa_hat: tuple[float, float] = Field(..., description="κ̂ per arm; equal under a common κ")
    var_gamma: tuple[float, float] = Field(..., description="Variance of each γ̂_g")
    var_beta: float = Field(..., gt=0, description="Variance of log(λ̂1/λ̂0)")
    converged: bool = True
    iterations: int = Field(default=0, ge=0)
    poisson_fallback: bool = Field(default=False, description="κ̂ fell below the floor and was set to 0")
    phi: Optional[float] = Field(None, description="Pearson dispersion (quasi-Poisson only)")
    method: str = "nb-common"

    @property
    def rate_hat(self) -> tuple[float, float]:
        return math.exp(self.gamma_hat[0]), math.exp(self.gamma_hat[1])

    @property
    def beta_hat(self) -> float:
        return self.gamma_hat[1] - self.gamma_hat[0]


class ArmFit(BaseModel):
    """NB estimates for a single group of subjects."""

    gamma_hat: float = Field(..., description="Log event rate")
    kappa_hat: float = Field(..., ge=0)
    var_gamma: float = Field(..., gt=0, description="Variance of γ̂ from the expected information")
    converged: bool = True
    iterations: int = Field(default=0, ge=0)
    poisson_fallback: bool = False

    @property
    def rate_hat(self) -> float:
        return math.exp(self.gamma_hat)


def records_to_arrays(data: Sequence[SubjectRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(arm, follow_up, events) column arrays from subject records."""
    arm = np.fromiter((r.arm for r in data), dtype=np.int64, count=len(data))
    follow_up = np.fromiter((r.follow_up for r in data), dtype=float, count=len(data))
    events = np.fromiter((r.events for r in data), dtype=np.int64, count=len(data))
    return arm, follow_up, events


def _check_arms(arm: np.ndarray, events: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.bincount(arm, minlength=2)
    totals = np.bincount(arm, weights=events, minlength=2)
    if sizes.size > 2:
        raise DomainError("arm indicator must be 0 or 1")
    for g in range(2):
        if sizes[g] == 0:
            raise BoundaryFitError(f"arm {g} has no subjects; use fit_nb_arm for single-arm data")
        if totals[g] == 0:
            raise BoundaryFitError(f"arm {g} has no events; the rate MLE is on the boundary")
    return sizes, totals


class _NBLikelihood:
    """Mean negative log-likelihood with gradient and Hessian in (γ…, θ…).

    ``group`` maps each subject to its rate parameter and ``theta_index`` to
    its log κ parameter.
    """

    def __init__(
        self,
        group: np.ndarray,
        follow_up: np.ndarray,
        events: np.ndarray,
        theta_index: np.ndarray,
        n_gamma: int = 2,
    ):
        self.group = group
        self.n_gamma = n_gamma
        self.log_t = np.log(follow_up)
        self.y = events.astype(float)
        self.theta_index = theta_index
        self.n_theta = int(theta_index.max()) + 1
        self.n = events.size
        self.log_y_factorial = special.gammaln(self.y + 1.0)

        # one entry per (subject, k) with k < y for the finite sums
        counts = events.astype(np.int64)
        self.owner = np.repeat(np.arange(self.n), counts)
        self.k = (np.arange(self.owner.size) - np.repeat(np.cumsum(counts) - counts, counts)).astype(float)

        self._cache_x: Optional[np.ndarray] = None
        self._cache: dict[str, np.ndarray] = {}

    def _terms(self, x: np.ndarray) -> dict[str, np.ndarray]:
        if self._cache_x is not None and np.array_equal(x, self._cache_x):
            return self._cache

        gamma, theta = x[: self.n_gamma], x[self.n_gamma :]
        log_mu = gamma[self.group] + self.log_t
        mu = np.exp(log_mu)
        kappa = np.exp(theta[self.theta_index])
        km = kappa * mu
        a = 1.0 + km
        log_a = np.log1p(km)
        log_a_over_kappa = log_a / kappa

        kk = kappa[self.owner] * self.k
        log_sum = np.bincount(self.owner, weights=np.log1p(kk), minlength=self.n)
        a1 = np.bincount(self.owner, weights=self.k / (1.0 + kk), minlength=self.n)
        a2 = np.bincount(self.owner, weights=(self.k / (1.0 + kk)) ** 2, minlength=self.n)

        y = self.y
        resid = y - mu
        terms = {
            "ll": log_sum - self.log_y_factorial + y * log_mu - y * log_a - log_a_over_kappa,
            "d_gamma": resid / a,
            "d_gamma2": -mu * (1.0 + kappa * y) / a**2,
            "d_gamma_theta": -kappa * mu * resid / a**2,
            "d_theta": kappa * a1 - mu * (1.0 + kappa * y) / a + log_a_over_kappa,
            "d_theta2": (
                kappa * a1
                - kappa**2 * a2
                - kappa * mu * resid / a**2
                + mu / a
                - log_a_over_kappa
            ),
        }
        self._cache_x = x.copy()
        self._cache = terms
        return terms

    def nll(self, x: np.ndarray) -> float:
        return -float(self._terms(x)["ll"].sum()) / self.n

    def grad(self, x: np.ndarray) -> np.ndarray:
        t = self._terms(x)
        g_gamma = np.bincount(self.group, weights=t["d_gamma"], minlength=self.n_gamma)
        g_theta = np.bincount(self.theta_index, weights=t["d_theta"], minlength=self.n_theta)
        return -np.concatenate([g_gamma, g_theta]) / self.n

    def hess(self, x: np.ndarray) -> np.ndarray:
        t = self._terms(x)
        g, m = self.n_gamma, self.n_theta
        h = np.zeros((g + m, g + m))
        h[:g, :g] = np.diag(np.bincount(self.group, weights=t["d_gamma2"], minlength=g))
        cross = np.bincount(
            self.group * m + self.theta_index, weights=t["d_gamma_theta"], minlength=g * m
        ).reshape(g, m)
        h[:g, g:] = cross
        h[g:, :g] = cross.T
        h[g:, g:] = np.diag(np.bincount(self.theta_index, weights=t["d_theta2"], minlength=m))
        return -h / self.n


def _moment_kappa(events: np.ndarray, mu: np.ndarray) -> float:
    excess = float(np.sum((events - mu) ** 2 - events))
    return max(excess / float(np.sum(mu**2)), KAPPA_START_FLOOR)

def _minimize(problem: _NBLikelihood, x0: np.ndarray) -> optimize.OptimizeResult:
    return optimize.minimize(
        problem.nll,
        x0,
        method="trust-exact",
        jac=problem.grad,
        hess=problem.hess,
        options={"gtol": settings.fit_grad_tol, "maxiter": settings.fit_max_iterations},
    )


def fit_nb_arrays(
    arm: np.ndarray,
    follow_up: np.ndarray,
    events: np.ndarray,
    dispersion_mode: DispersionMode = DispersionMode.COMMON,
) -> FitResult:
    """NB maximum likelihood fit of a two-arm trial.

    Args:
        arm: 0/1 arm indicator per subject
        follow_up: Follow-up time per subject (> 0)
        events: Event count per subject
        dispersion_mode: One κ for both arms, or a separate κ per arm

    Returns:
        FitResult whose variances use the expected information Σ μ̂/(1+κ̂μ̂)

    Raises:
        BoundaryFitError: An arm has no subjects or no events
    """
    arm = np.asarray(arm, dtype=np.int64)
    follow_up = np.asarray(follow_up, dtype=float)
    events = np.asarray(events, dtype=np.int64)
    if np.any(follow_up <= 0):
        raise DomainError("follow-up times must be > 0")
    _, totals = _check_arms(arm, events)
    exposure = np.bincount(arm, weights=follow_up, minlength=2)

    per_arm = dispersion_mode is DispersionMode.PER_ARM
    theta_index = arm if per_arm else np.zeros_like(arm)
    groups = (0, 1) if per_arm else (0,)

    poisson_gamma = np.log(totals / exposure)
    mu0 = np.exp(poisson_gamma[arm]) * follow_up
    theta0 = [
        math.log(_moment_kappa(events[theta_index == j], mu0[theta_index == j])) for j in groups
    ]
    x0 = np.concatenate([poisson_gamma, theta0])

    res = _minimize(_NBLikelihood(arm, follow_up, events, theta_index), x0)

    gamma = np.array(res.x[:2])
    kappa_by_group = np.exp(res.x[2:])
    fallback = False
    for j in groups:
        if kappa_by_group[j] < settings.kappa_floor:
            # κ = 0 is the Poisson model, whose rate MLE is events over exposure
            kappa_by_group[j] = 0.0
            owned = (0, 1) if not per_arm else (j,)
            for g in owned:
                gamma[g] = poisson_gamma[g]
            fallback = True
    if fallback:
        logger.debug(f"NB fit fell back to Poisson: κ̂={np.exp(res.x[2:])}")

    kappa_hat = (
        (float(kappa_by_group[0]), float(kappa_by_group[1]))
        if per_arm
        else (float(kappa_by_group[0]),) * 2
    )
    mu = np.exp(gamma[arm]) * follow_up
    kappa_obs = np.asarray(kappa_hat)[arm]
    info = np.bincount(arm, weights=mu / (1.0 + kappa_obs * mu), minlength=2)
    var_gamma = (float(1.0 / info[0]), float(1.0 / info[1]))

    return FitResult(
        gamma_hat=(float(gamma[0]), float(gamma[1])),
        kappa_hat=kappa_hat,
        var_gamma=var_gamma,
        var_beta=var_gamma[0] + var_gamma[1],
        converged=bool(res.success) or fallback,
        iterations=int(res.nit),
        poisson_fallback=fallback,
        method=f"nb-{dispersion_mode.value}",
    )


def fit_nb(data: Sequence[SubjectRecord], dispersion_mode: DispersionMode = DispersionMode.COMMON) -> FitResult:
    """NB fit from subject records."""
    return fit_nb_arrays(*records_to_arrays(data), dispersion_mode=dispersion_mode)


def fit_nb_arm_arrays(follow_up: np.ndarray, events: np.ndarray) -> ArmFit:
    """NB maximum likelihood fit of (γ, log κ) for one group of subjects.

    Raises:
        BoundaryFitError: No subjects, or no events so the rate MLE is on the boundary
    """
    follow_up = np.asarray(follow_up, dtype=float)
    events = np.asarray(events, dtype=np.int64)
    if events.size == 0:
        raise BoundaryFitError("no subjects to fit")
    if np.any(follow_up <= 0):
        raise DomainError("follow-up times must be > 0")
    total = float(events.sum())
    if total == 0:
        raise BoundaryFitError("no events; the rate MLE is on the boundary")

    poisson_gamma = math.log(total / float(follow_up.sum()))
    mu0 = math.exp(poisson_gamma) * follow_up
    x0 = np.array([poisson_gamma, math.log(_moment_kappa(events, mu0))])
    group = np.zeros(events.size, dtype=np.int64)
    res = _minimize(_NBLikelihood(group, follow_up, events, group, n_gamma=1), x0)

    gamma, kappa = float(res.x[0]), math.exp(res.x[1])
    fallback = kappa < settings.kappa_floor
    if fallback:
        gamma, kappa = poisson_gamma, 0.0
        logger.debug(f"single-arm NB fit fell back to Poisson: κ̂={math.exp(res.x[1])}")

    mu = math.exp(gamma) * follow_up
    return ArmFit(
        gamma_hat=gamma,
        kappa_hat=kappa,
        var_gamma=1.0 / float(np.sum(mu / (1.0 + kappa * mu))),
        converged=bool(res.success) or fallback,
        iterations=int(res.nit),
        poisson_fallback=fallback,
    )


def fit_nb_arm(data: Sequence[SubjectRecord]) -> ArmFit:
    """Single-arm NB fit from subject records; the arm labels are ignored."""
    _, follow_up, events = records_to_arrays(data)
    return fit_nb_arm_arrays(follow_up, events)


def fit_quasi_poisson_arrays(arm: np.ndarray, follow_up: np.ndarray, events: np.ndarray) -> FitResult:
    """Poisson rates with the Pearson dispersion φ̂ inflating their variance.

    Raises:
        BoundaryFitError: An arm has no events
        DomainError: Fewer than three subjects, so n − 2 leaves no residual degrees of freedom
    """
    arm = np.asarray(arm, dtype=np.int64)
    follow_up = np.asarray(follow_up, dtype=float)
    events = np.asarray(events, dtype=np.int64)
    _, totals = _check_arms(arm, events)
    dof = events.size - 2
    if dof <= 0:
        raise DomainError(f"Pearson dispersion needs n > 2 subjects, got {events.size}")

    exposure = np.bincount(arm, weights=follow_up, minlength=2)
    rates = totals / exposure
    mu = rates[arm] * follow_up
    phi = float(np.sum((events - mu) ** 2 / mu)) / dof

    var_gamma = (phi / float(totals[0]), phi / float(totals[1]))
    return FitResult(
        gamma_hat=(math.log(rates[0]), math.log(rates[1])),
        kappa_hat=(0.0, 0.0),
        var_gamma=var_gamma,
        var_beta=var_gamma[0] + var_gamma[1],
        phi=phi,
        method="quasi-poisson",
    )


def fit_quasi_poisson(data: Sequence[SubjectRecord]) -> FitResult:
    """Quasi-Poisson fit from subject records."""
    return fit_quasi_poisson_arrays(*records_to_arrays(data))
