"""Deterministic columns of the NI, heterogeneous-dispersion and equivalence design tables."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Optional

import pandas as pd

from ..core.logfire_tracing import traced
from ..core.models import ArmSpec, EffectMetric, FollowUpDesign, Hypothesis, SizingResult, TrialSpec
from ..design.follow_up import dropout_proportion_to_hazard
from ..sizing.effect import translate_margin
from ..sizing.planner import size_trial
from .config_loader import TableName

logger = logging.getLogger(__name__)

ALPHA = 0.05
TARGET_POWER = 0.8
EXP_BETAS = (0.65, 0.80, 0.95, 1.00, 1.05)
NI_ARMS = ((0.6, 1.0), (0.9, 1.5))  # (λ0, κ)
NI_MARGINS = (1.2, 1.3)
EQUIVALENCE_MARGIN = 1.3
HETEROGENEOUS_MARGIN = 1.3
HETEROGENEOUS_KAPPAS = ((2.0, 1.0), (1.0, 2.0), (2.0, 0.5), (0.5, 2.0))


def design_one() -> tuple[FollowUpDesign, float]:
    """Two years of planned follow-up with 25% lost by year two."""
    return FollowUpDesign.fixed(2.0), dropout_proportion_to_hazard(0.25, 2.0)


def design_two() -> tuple[FollowUpDesign, float]:
    """Two years of uniform accrual, two more of follow-up, dropout hazard 0.2."""
    return FollowUpDesign.staggered(2.0, 2.0), 0.2


DESIGNS = {1: design_one, 2: design_two}


def make_trial(
    design: FollowUpDesign,
    dropout: float,
    rates: tuple[float, float],
    kappas: tuple[float, float],
    hypothesis: Hypothesis,
) -> TrialSpec:
    control = ArmSpec(rate=rates[0], kappa=kappas[0], dropout_hazard=dropout)
    active = ArmSpec(rate=rates[1], kappa=kappas[1], dropout_hazard=dropout)
    return TrialSpec(control=control, active=active, design=design, hypothesis=hypothesis, alpha=ALPHA)


def _sizes(result: SizingResult, prefix: str) -> dict[str, int]:
    return {f"n_{prefix}l": result.n_lower, f"n_{prefix}": result.n, f"n_{prefix}u": result.n_upper}


def ni_table(design_no: int) -> pd.DataFrame:
    """Ratio and difference NI sizes over λ0/κ, margin and true ratio."""
    design, dropout = DESIGNS[design_no]()
    rows = []
    for lambda0, kappa in NI_ARMS:
        for mr0 in NI_MARGINS:
            for exp_beta in EXP_BETAS:
                lambda1 = lambda0 * exp_beta
                md0 = translate_margin(mr0, lambda0, lambda1)
                rates, kappas = (lambda0, lambda1), (kappa, kappa)
                ratio = size_trial(
                    make_trial(design, dropout, rates, kappas, Hypothesis.noninferiority(mr0)), TARGET_POWER
                )
                diff = size_trial(
                    make_trial(
                        design, dropout, rates, kappas, Hypothesis.noninferiority(md0, EffectMetric.DIFFERENCE)
                    ),
                    TARGET_POWER,
                )
                rows.append(
                    {
                        "lambda0": lambda0,
                        "exp_beta": exp_beta,
                        "kappa": kappa,
                        "mr0": mr0,
                        "n_zr": ratio.n_zhu,
                        **_sizes(ratio, "r"),
                        "md0": md0,
                        **_sizes(diff, "d"),
                    }
                )
    return pd.DataFrame(rows)


def heterogeneous_table() -> pd.DataFrame:
    """NI sizes under design 1 when κ differs between arms."""
    design, dropout = design_one()
    rows = []
    for exp_beta in (0.8, 0.9, 1.0):
        for lambda0 in (0.6, 1.0):
            for kappas in HETEROGENEOUS_KAPPAS:
                lambda1 = lambda0 * exp_beta
                md0 = translate_margin(HETEROGENEOUS_MARGIN, lambda0, lambda1)
                rates = (lambda0, lambda1)
                ratio = size_trial(
                    make_trial(design, dropout, rates, kappas, Hypothesis.noninferiority(HETEROGENEOUS_MARGIN)),
                    TARGET_POWER,
                )
                diff = size_trial(
                    make_trial(
                        design, dropout, rates, kappas, Hypothesis.noninferiority(md0, EffectMetric.DIFFERENCE)
                    ),
                    TARGET_POWER,
                )
                rows.append(
                    {
                        "lambda0": lambda0,
                        "kappa0": kappas[0],
                        "lambda1": lambda1,
                        "kappa1": kappas[1],
                        "mr0": HETEROGENEOUS_MARGIN,
                        **_sizes(ratio, "r"),
                        "md0": md0,
                        **_sizes(diff, "d"),
                    }
                )
    return pd.DataFrame(rows)


# (design, λ0, exp(β), κ); the second design-2 κ=1.5 row at exp(β)=1 is sized with λ0 = 1.0
EQUIVALENCE_ROWS = (
    (1, 0.6, 1.00, 1.0),
    (1, 0.6, 1.05, 1.0),
    (1, 0.9, 1.00, 1.5),
    (1, 0.9, 1.05, 1.5),
    (2, 0.6, 1.00, 1.0),
    (2, 0.6, 1.05, 1.0),
    (2, 1.0, 1.00, 1.5),
    (2, 0.9, 1.05, 1.5),
)


def equivalence_table() -> pd.DataFrame:
    """Equivalence sizes with margins (1/1.3, 1.3) and the matching difference margins."""
    rows = []
    for design_no, lambda0, exp_beta, kappa in EQUIVALENCE_ROWS:
        design, dropout = DESIGNS[design_no]()
        lambda1 = lambda0 * exp_beta
        rates, kappas = (lambda0, lambda1), (kappa, kappa)
        mdu = translate_margin(EQUIVALENCE_MARGIN, lambda0, lambda1)
        ratio = size_trial(
            make_trial(design, dropout, rates, kappas, Hypothesis.equivalence(EQUIVALENCE_MARGIN)), TARGET_POWER
        )
        diff = size_trial(
            make_trial(design, dropout, rates, kappas, Hypothesis.equivalence(mdu, metric=EffectMetric.DIFFERENCE)),
            TARGET_POWER,
        )
        rows.append(
            {
                "design": design_no,
                "lambda0": lambda0,
                "exp_beta": exp_beta,
                "kappa": kappa,
                "n_zr": ratio.n_zhu,
                **_sizes(ratio, "r"),
                **_sizes(diff, "d"),
            }
        )
    return pd.DataFrame(rows)


BUILDERS = {
    TableName.NI_DESIGN1: lambda: ni_table(1),
    TableName.NI_DESIGN2: lambda: ni_table(2),
    TableName.HETEROGENEOUS: heterogeneous_table,
    TableName.EQUIVALENCE: equivalence_table,
}


@traced("tables")
def build_tables(which: TableName = TableName.ALL) -> dict[str, pd.DataFrame]:
    """Requested tables keyed by name, in a fixed order."""
    names = list(BUILDERS) if which is TableName.ALL else [which]
    tables = {}
    for name in names:
        frame = BUILDERS[name]()
        if "md0" in frame:
            frame["md0"] = frame["md0"].round(4)
        tables[name.value] = frame
        logger.info(f"Built table {name.value}: {len(frame)} rows")
    return tables


def write_tables(tables: dict[str, pd.DataFrame], out_dir: Optional[Path]) -> list[Path]:
    """Write each table to <out_dir>/<name>.csv."""
    if out_dir is None:
        return []
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, frame in tables.items():
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False)
        paths.append(path)
        logger.info(f"✅ Wrote {path}")
    return paths


def max_abs_gap(left: pd.Series, right: pd.Series) -> float:
    """Largest absolute difference between two aligned numeric columns."""
    return float((left.reset_index(drop=True) - right.reset_index(drop=True)).abs().max()) if len(left) else math.nan
