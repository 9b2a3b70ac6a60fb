"""Pydantic models shared by the sizing, design and simulation layers."""

from __future__ import annotations

import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Relative slack for orderings between analytic values and quadrature results
ORDERING_SLACK = 1e-9


# ============================================================================
# Enumerations
# ============================================================================


class DesignKind(str, Enum):
    """How subjects enter the trial and how long they can be followed."""
    FIXED_DURATION = "fixed_duration"        # design 1: everyone followed for tau_c
    STAGGERED_ACCRUAL = "staggered_accrual"  # design 2: entry over tau_a, then tau_c


class HypothesisKind(str, Enum):
    """Trial objective."""
    SUPERIORITY = "sup"
    NONINFERIORITY = "ni"
    EQUIVALENCE = "equi"


class EffectMetric(str, Enum):
    """Scale on which the treatment effect is tested."""
    RATIO = "ratio"
    DIFFERENCE = "diff"


class InfoBound(str, Enum):
    """Which information quantity feeds the variance: quadrature d or a bound."""
    EXACT = "exact"
    LOWER = "lower"
    UPPER = "upper"


class RoundingMode(str, Enum):
    """Rounding of a real-valued size to whole subjects."""
    TOTAL = "total"
    PER_ARM = "per-arm"


class AnalysisModel(str, Enum):
    """Model fitted to each simulated trial."""
    NB = "nb"
    QUASI_POISSON = "quasi-poisson"


class DispersionMode(str, Enum):
    """Whether the NB fit shares κ between arms."""
    COMMON = "common"
    PER_ARM = "per-arm"


# ============================================================================
# Design and arm models
# ============================================================================


class FollowUpDesign(BaseModel):
    """Accrual and administrative censoring of a trial (shared by both arms)."""

    model_config = ConfigDict(frozen=True)

    kind: DesignKind = Field(default=DesignKind.FIXED_DURATION, description="Design 1 or design 2")
    tau_c: float = Field(..., gt=0, description="Follow-up after accrual closes (years)")
    tau_a: float = Field(default=0.0, ge=0, description="Accrual duration (years), design 2 only")
    eta: float = Field(default=0.0, description="Entry density shape; 0 means uniform entry")

    @model_validator(mode="after")
    def _check_accrual(self) -> "FollowUpDesign":
        if self.kind is DesignKind.STAGGERED_ACCRUAL and self.tau_a <= 0:
            raise ValueError("tau_a must be > 0 for staggered accrual")
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")
        return self

    @classmethod
    def fixed(cls, tau_c: float) -> "FollowUpDesign":
        return cls(kind=DesignKind.FIXED_DURATION, tau_c=tau_c)

    @classmethod
    def staggered(cls, tau_a: float, tau_c: float, eta: float = 0.0) -> "FollowUpDesign":
        return cls(kind=DesignKind.STAGGERED_ACCRUAL, tau_a=tau_a, tau_c=tau_c, eta=eta)

    @property
    def is_staggered(self) -> bool:
        return self.kind is DesignKind.STAGGERED_ACCRUAL

    @property
    def total_duration(self) -> float:
        """Calendar length τ of the trial."""
        return self.tau_a + self.tau_c if self.is_staggered else self.tau_c


class ArmSpec(BaseModel):
    """Event rate, dispersion, allocation and dropout of one treatment arm."""

    model_config = ConfigDict(frozen=True)

    rate: float = Field(..., gt=0, description="Event rate λ per unit time")
    kappa: float = Field(default=0.0, ge=0, description="NB dispersion κ (0 is Poisson)")
    allocation: float = Field(default=0.5, gt=0, lt=1, description="Fraction of subjects p_g")
    dropout_hazard: float = Field(default=0.0, ge=0, description="Exponential loss-to-follow-up rate δ")

    def with_rate(self, rate: float) -> "ArmSpec":
        return self.model_copy(update={"rate": rate})


class FollowUpMoments(BaseModel):
    """First two moments and the maximum of the follow-up time."""

    model_config = ConfigDict(frozen=True)

    mean_t: float = Field(..., gt=0, description="E(t)")
    mean_t2: float = Field(..., gt=0, description="E(t²)")
    max_t: float = Field(..., gt=0, description="Maximum possible follow-up t_m")
    cv: float = Field(..., ge=0, description="Coefficient of variation of t")

    @model_validator(mode="after")
    def _check_ordering(self) -> "FollowUpMoments":
        slack = 1 + ORDERING_SLACK
        if self.mean_t**2 > self.mean_t2 * slack or self.mean_t2 > self.max_t * self.mean_t * slack:
            raise ValueError(
                f"inconsistent follow-up moments: E(t)={self.mean_t}, E(t²)={self.mean_t2}, t_m={self.max_t}"
            )
        return self


class InfoQuantities(BaseModel):
    """Per-subject information d = E[λt/(1+κλt)] and its analytic bounds."""

    model_config = ConfigDict(frozen=True)

    d: float = Field(..., gt=0)
    d_lower: float = Field(..., gt=0)
    d_upper: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _check_ordering(self) -> "InfoQuantities":
        slack = 1 + ORDERING_SLACK
        if self.d_lower > self.d * slack or self.d > self.d_upper * slack:
            raise ValueError(f"expected d_lower <= d <= d_upper, got {self.d_lower}, {self.d}, {self.d_upper}")
        return self

    def select(self, bound: InfoBound) -> float:
        if bound is InfoBound.LOWER:
            return self.d_lower
        if bound is InfoBound.UPPER:
            return self.d_upper
        return self.d


# ============================================================================
# Hypotheses and trials
# ============================================================================


class Hypothesis(BaseModel):
    """Trial objective with its margins on the chosen metric.

    Superiority is stored as non-inferiority at the null margin (1 on the
    ratio scale, 0 on the difference scale). An equivalence hypothesis given
    only an upper margin gets the reciprocal (ratio) or negated (difference)
    lower margin.
    """

    model_config = ConfigDict(frozen=True)

    kind: HypothesisKind
    metric: EffectMetric = EffectMetric.RATIO
    margin_ni: Optional[float] = Field(None, description="M_r0 or M_d0")
    margin_lower: Optional[float] = Field(None, description="M_rl or M_dl")
    margin_upper: Optional[float] = Field(None, description="M_ru or M_du")

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = HypothesisKind(data.get("kind"))
        metric = EffectMetric(data.get("metric", EffectMetric.RATIO))
        if kind is HypothesisKind.SUPERIORITY and data.get("margin_ni") is None:
            data["margin_ni"] = 1.0 if metric is EffectMetric.RATIO else 0.0
        if kind is HypothesisKind.EQUIVALENCE and data.get("margin_lower") is None:
            upper = data.get("margin_upper")
            if upper is not None and upper != 0:
                data["margin_lower"] = 1.0 / upper if metric is EffectMetric.RATIO else -upper
        return data

    @model_validator(mode="after")
    def _check_margins(self) -> "Hypothesis":
        ratio = self.metric is EffectMetric.RATIO
        if self.kind is HypothesisKind.SUPERIORITY:
            null = 1.0 if ratio else 0.0
            if self.margin_ni != null:
                raise ValueError(f"superiority uses the null margin {null}, got {self.margin_ni}")
        elif self.kind is HypothesisKind.NONINFERIORITY:
            if self.margin_ni is None:
                raise ValueError("non-inferiority needs margin_ni")
            if ratio and self.margin_ni <= 0:
                raise ValueError("ratio non-inferiority margin must be > 0")
        else:
            if self.margin_upper is None or self.margin_lower is None:
                raise ValueError("equivalence needs an upper margin")
            if ratio and not 0 < self.margin_lower < self.margin_upper:
                raise ValueError("ratio equivalence margins must satisfy 0 < M_rl < M_ru")
            if not ratio and not self.margin_lower < 0 < self.margin_upper:
                raise ValueError("difference equivalence margins must satisfy M_dl < 0 < M_du")
        return self

    @classmethod
    def superiority(cls, metric: EffectMetric = EffectMetric.RATIO) -> "Hypothesis":
        return cls(kind=HypothesisKind.SUPERIORITY, metric=metric)

    @classmethod
    def noninferiority(cls, margin: float, metric: EffectMetric = EffectMetric.RATIO) -> "Hypothesis":
        return cls(kind=HypothesisKind.NONINFERIORITY, metric=metric, margin_ni=margin)

    @classmethod
    def equivalence(
        cls, upper: float, lower: Optional[float] = None, metric: EffectMetric = EffectMetric.RATIO
    ) -> "Hypothesis":
        return cls(kind=HypothesisKind.EQUIVALENCE, metric=metric, margin_upper=upper, margin_lower=lower)

    @property
    def is_equivalence(self) -> bool:
        return self.kind is HypothesisKind.EQUIVALENCE


class TrialSpec(BaseModel):
    """Everything needed to size or simulate a two-arm trial."""

    model_config = ConfigDict(frozen=True)

    control: ArmSpec
    active: ArmSpec
    design: FollowUpDesign
    hypothesis: Hypothesis
    alpha: float = Field(default=0.05, gt=0, lt=1, description="Two-sided level; one-sided α/2")
    rounding: RoundingMode = RoundingMode.TOTAL

    @model_validator(mode="after")
    def _check_allocation(self) -> "TrialSpec":
        if abs(self.control.allocation + self.active.allocation - 1.0) > 1e-9:
            raise ValueError("arm allocations must sum to 1")
        return self

    @property
    def arms(self) -> tuple[ArmSpec, ArmSpec]:
        return self.control, self.active

    def with_rates(self, rate0: float, rate1: float) -> "TrialSpec":
        return self.model_copy(
            update={"control": self.control.with_rate(rate0), "active": self.active.with_rate(rate1)}
        )


# ============================================================================
# Results
# ============================================================================


class EffectSummary(BaseModel):
    """Effect size, distances to the margins and unit-n variance of the estimate."""

    model_config = ConfigDict(frozen=True)

    kind: HypothesisKind
    metric: EffectMetric
    beta: float = Field(..., description="log(λ1/λ0) or λ1−λ0")
    beta_star: Optional[float] = Field(None, description="margin − β (non-inferiority, superiority)")
    delta_a: Optional[float] = Field(None, description="upper margin − β (equivalence)")
    delta_b: Optional[float] = Field(None, description="lower margin − β (equivalence)")
    sigma2: float = Field(..., gt=0, description="σ² evaluated at the selected d")
    sigma2_at_d_upper: Optional[float] = Field(None, gt=0, description="σ² with d_upper; gives n_lower")
    sigma2_at_d_lower: Optional[float] = Field(None, gt=0, description="σ² with d_lower; gives n_upper")
    control_allocation: float = Field(default=0.5, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_margins(self) -> "EffectSummary":
        if self.kind is HypothesisKind.EQUIVALENCE:
            if self.delta_a is None or self.delta_b is None or not self.delta_a > 0 > self.delta_b:
                raise ValueError("equivalence requires delta_a > 0 > delta_b")
        elif self.beta_star is None:
            raise ValueError("non-inferiority requires beta_star")
        return self


class SizingResult(BaseModel):
    """Sample size with bounds, the comparator and the power actually attained."""

    n_raw: float = Field(..., gt=0)
    n: int = Field(..., ge=1)
    n_lower: int = Field(..., ge=1)
    n_upper: int = Field(..., ge=1)
    n_zhu: Optional[int] = Field(None, description="Mean follow-up comparator size")
    n_upper_coarse: Optional[float] = Field(None, description="Design-free upper bound on n (ratio NI)")
    n_per_arm: tuple[int, int]
    nominal_power_at_n: float = Field(..., ge=0, le=1)
    target_power: float = Field(..., gt=0, lt=1)
    rounding: RoundingMode = RoundingMode.TOTAL

    @model_validator(mode="after")
    def _check_consistency(self) -> "SizingResult":
        if self.n < self.n_raw - 1e-4:
            raise ValueError(f"n={self.n} is below n_raw={self.n_raw}")
        if not self.n_lower <= self.n <= self.n_upper:
            raise ValueError(f"expected n_lower <= n <= n_upper, got {self.n_lower}, {self.n}, {self.n_upper}")
        if sum(self.n_per_arm) != self.n:
            raise ValueError("per-arm sizes must add up to n")
        if self.nominal_power_at_n < self.target_power - 1e-12:
            raise ValueError("nominal power at n is below the target")
        return self


class PowerResult(BaseModel):
    """Nominal power at a given total size with bounds from d_lower and d_upper."""

    n: int = Field(..., ge=1)
    power: float = Field(..., ge=0, le=1)
    power_lower: float = Field(..., ge=0, le=1)
    power_upper: float = Field(..., ge=0, le=1)


class SimReport(BaseModel):
    """Outcome of a Monte Carlo run."""

    replications: int = Field(..., ge=1)
    rejections: int = Field(..., ge=0)
    rejection_rate: float = Field(..., ge=0, le=1)
    mc_se: float = Field(..., ge=0)
    fit_failures: int = Field(default=0, ge=0)
    poisson_fallbacks: int = Field(default=0, ge=0)
    seed: int
    n: int = Field(..., ge=2)
    n_per_arm: tuple[int, int]
    analysis: AnalysisModel = AnalysisModel.NB

    @model_validator(mode="after")
    def _check_counts(self) -> "SimReport":
        if self.rejections + self.fit_failures > self.replications:
            raise ValueError("rejections and failures exceed the replication count")
        return self
