"""Subject-level data generation: entry, dropout, gamma frailty and Poisson counts."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..core.models import ArmSpec, FollowUpDesign
from ..design.follow_up import ETA_ZERO_TOL, exp_tail

logger = logging.getLogger(__name__)


class SubjectRecord(BaseModel):
    """One simulated subject."""

    arm: int = Field(..., ge=0, le=1, description="0 control, 1 active")
    entry_time: float = Field(default=0.0, ge=0, description="Calendar entry time e")
    follow_up: float = Field(..., gt=0, description="Observed follow-up t")
    events: int = Field(..., ge=0, description="Observed event count y")

    @model_validator(mode="after")
    def _check_follow_up(self) -> "SubjectRecord":
        if not math.isfinite(self.follow_up):
            raise ValueError("follow-up must be finite")
        return self


@dataclass(frozen=True)
class ArmSample:
    """Column arrays for the subjects of one arm."""

    arm: int
    entry_time: np.ndarray
    follow_up: np.ndarray
    events: np.ndarray

    @property
    def size(self) -> int:
        return int(self.events.size)

    def records(self) -> list[SubjectRecord]:
        return [
            SubjectRecord(arm=self.arm, entry_time=float(e), follow_up=float(t), events=int(y))
            for e, t, y in zip(self.entry_time, self.follow_up, self.events)
        ]


def _entry_times(design: FollowUpDesign, u: np.ndarray) -> np.ndarray:
    if not design.is_staggered:
        return np.zeros_like(u)
    tau_a, eta = design.tau_a, design.eta
    if abs(eta) * tau_a < ETA_ZERO_TOL:
        return tau_a * u
    # inverse CDF of the truncated exponential entry density on [0, tau_a]
    return -np.log1p(-u * exp_tail(1, eta * tau_a)) / eta


def sample_arm(
    design: FollowUpDesign,
    arm: ArmSpec,
    size: int,
    rng: np.random.Generator,
    arm_index: int = 0,
) -> ArmSample:
    """Draw ``size`` subjects of one arm.

    Draw order is fixed (entry, dropout, frailty, counts), so a generator
    in a given state always yields the same sample.
    """
    entry = _entry_times(design, rng.random(size))
    horizon = design.total_duration - entry

    if arm.dropout_hazard > 0:
        dropout = rng.exponential(1.0 / arm.dropout_hazard, size)
        follow_up = np.minimum(horizon, dropout)
    else:
        follow_up = horizon

    if arm.kappa > 0:
        frailty = rng.gamma(shape=1.0 / arm.kappa, scale=arm.kappa, size=size)
    else:
        frailty = np.ones(size)

    events = rng.poisson(frailty * arm.rate * follow_up)
    return ArmSample(arm=arm_index, entry_time=entry, follow_up=follow_up, events=events)


def sample_subject(
    design: FollowUpDesign, arm: ArmSpec, rng: np.random.Generator, arm_index: int = 0
) -> SubjectRecord:
    """A single subject; same draw order as ``sample_arm``."""
    return sample_arm(design, arm, 1, rng, arm_index).records()[0]
