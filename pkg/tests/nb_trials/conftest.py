"""Shared fixtures for the nb_trials tests."""

import sys
from pathlib import Path

# Add project root to path
ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(ROOT))

import pandas as pd
import pytest

from backend.nb_trials.core.models import ArmSpec, FollowUpDesign, Hypothesis, TrialSpec
from backend.nb_trials.design.follow_up import dropout_proportion_to_hazard

PAPER_TABLES = ROOT / "data" / "paper_tables"

# 25% of subjects lost by year 2
DESIGN_ONE_DROPOUT = dropout_proportion_to_hazard(0.25, 2.0)


def make_trial(
    lambda0: float,
    lambda1: float,
    kappa0: float = 1.0,
    kappa1=None,
    hypothesis: Hypothesis = None,
    design: FollowUpDesign = None,
    dropout: float = DESIGN_ONE_DROPOUT,
    p0: float = 0.5,
    **kwargs,
) -> TrialSpec:
    kappa1 = kappa0 if kappa1 is None else kappa1
    return TrialSpec(
        control=ArmSpec(rate=lambda0, kappa=kappa0, allocation=p0, dropout_hazard=dropout),
        active=ArmSpec(rate=lambda1, kappa=kappa1, allocation=1.0 - p0, dropout_hazard=dropout),
        design=design or FollowUpDesign.fixed(2.0),
        hypothesis=hypothesis or Hypothesis.noninferiority(1.3),
        **kwargs,
    )


@pytest.fixture
def design_one() -> FollowUpDesign:
    return FollowUpDesign.fixed(2.0)


@pytest.fixture
def design_two() -> FollowUpDesign:
    return FollowUpDesign.staggered(2.0, 2.0)


@pytest.fixture
def paper_table():
    def load(name: str) -> pd.DataFrame:
        return pd.read_csv(PAPER_TABLES / f"{name}.csv")
    return load
