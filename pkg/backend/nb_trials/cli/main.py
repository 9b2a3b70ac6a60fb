"""nb-trials command-line entry point."""

from __future__ import annotations

import json
import logging
import sys
from typing import Any, Optional, Sequence, TextIO

import pandas as pd

from ..core.config import settings
from ..core.errors import ConfigValidationError, NBTrialsError
from ..core.logfire_tracing import setup_logfire
from ..core.models import TrialSpec
from ..design.follow_up import follow_up_moments
from ..sim.runner import monte_carlo, null_rates
from ..sizing.planner import size_trial, trial_information, trial_power
from ..summary.back_calculation import (
    kappa_from_quasi_poisson,
    kappa_from_rate_ci,
    kappa_from_ratio_ci,
    kappa_zhu_lakkis,
    overall_mean_events,
    phi_from_ratio_ci,
    pooled_event_rate,
)
from .config_loader import Command, ExitCode, OutputFormat, RunConfig, parse_and_validate
from .tables import build_tables, write_tables

logger = logging.getLogger(__name__)

PERCENT_KEYS = ("nominal_power_at_n", "target_power", "power", "power_lower", "power_upper", "rejection_rate", "mc_se")


# ============================================================================
# Output
# ============================================================================


def _csv_row(record: dict[str, Any]) -> dict[str, Any]:
    row: dict[str, Any] = {}
    for key, value in record.items():
        if isinstance(value, (list, tuple)):
            for i, item in enumerate(value):
                row[f"{key}{i}"] = item
        elif key in PERCENT_KEYS and value is not None:
            row[key] = f"{100.0 * value:.2f}"
        else:
            row[key] = value
    return row


def emit(records: list[dict[str, Any]], fmt: OutputFormat, human: str, out: TextIO) -> None:
    """Write records as JSON lines, a CSV with header, or the human summary."""
    if fmt is OutputFormat.JSONL:
        for record in records:
            out.write(json.dumps(record) + "\n")
    elif fmt is OutputFormat.CSV:
        pd.DataFrame([_csv_row(r) for r in records]).to_csv(out, index=False, lineterminator="\n")
    else:
        out.write(human.rstrip("\n") + "\n")


def _arm_lines(trial: TrialSpec) -> list[str]:
    lines = []
    for g, (arm, info) in enumerate(zip(trial.arms, trial_information(trial))):
        m = follow_up_moments(trial.design, arm.dropout_hazard)
        lines.append(
            f"  arm {g}: d={info.d:.6f} dl={info.d_lower:.6f} du={info.d_upper:.6f} "
            f"E(t)={m.mean_t:.6f} E(t*t)={m.mean_t2:.6f}"
        )
    return lines


def _describe(trial: TrialSpec) -> str:
    h = trial.hypothesis
    return f"{h.kind.value}/{h.metric.value}, {trial.design.kind.value}, alpha={trial.alpha:g}"


# ============================================================================
# Commands
# ============================================================================


def _run_size(config: RunConfig, out: TextIO) -> None:
    trial = config.trial
    result = size_trial(trial, config.target_power)
    record = {"command": "size", **result.model_dump(mode="json")}
    human = [
        f"Sample size ({_describe(trial)}, target power {config.target_power:.2%})",
        *_arm_lines(trial),
        f"  n_raw = {result.n_raw:.4f}",
        f"  n = {result.n} ({result.n_per_arm[0]} + {result.n_per_arm[1]}), bounds [{result.n_lower}, {result.n_upper}]",
    ]
    if result.n_zhu is not None:
        human.append(f"  mean follow-up comparator n = {result.n_zhu}")
    if result.n_upper_coarse is not None:
        human.append(f"  design-free upper bound = {result.n_upper_coarse:.1f}")
    human.append(f"  nominal power at n = {result.nominal_power_at_n:.4f}")
    emit([record], config.output_format, "\n".join(human), out)


def _run_power(config: RunConfig, out: TextIO) -> None:
    trial = config.trial
    result = trial_power(trial, config.ntot)
    record = {"command": "power", **result.model_dump(mode="json")}
    human = [
        f"Power ({_describe(trial)})",
        *_arm_lines(trial),
        f"  The nominal power is {result.power:.4f} at the sample size {result.n} "
        f"(bounds [{result.power_lower:.4f}, {result.power_upper:.4f}])",
    ]
    emit([record], config.output_format, "\n".join(human), out)


def _run_simulate(config: RunConfig, out: TextIO) -> None:
    trial = config.trial
    n = config.ntot or size_trial(trial, config.target_power).n
    truth = null_rates(trial) if config.simulate_null else None
    report = monte_carlo(
        trial,
        n,
        truth=truth,
        replications=config.replications,
        seed=config.seed,
        analysis=config.analysis,
        dispersion_mode=config.dispersion_mode,
        workers=config.workers,
    )
    record = {"command": "simulate", **report.model_dump(mode="json")}
    label = "type I error" if config.simulate_null else "power"
    human = (
        f"Simulated {label} ({_describe(trial)}, {report.analysis.value}): "
        f"{report.rejection_rate:.4f} ± {report.mc_se:.4f} over {report.replications} trials "
        f"of n={report.n} ({report.fit_failures} fit failures, seed {report.seed})"
    )
    emit([record], config.output_format, human, out)


def _run_backcalc(config: RunConfig, out: TextIO) -> None:
    data = config.backcalc
    arms = data.arms
    record: dict[str, Any] = {"command": "backcalc"}
    human = ["κ back-calculation"]

    phi = data.phi
    if data.ratio_ci is not None:
        interval = kappa_from_ratio_ci(arms, data.ratio_ci, data.alpha)
        record.update(kappa_lower=interval.lower, kappa_upper=interval.upper, clipped=interval.clipped)
        human.append(f"  rate ratio CI: κ in [{interval.lower:.4f}, {interval.upper:.4f}]")
        if phi is None:
            phi = phi_from_ratio_ci(arms, data.ratio_ci, data.alpha)

    for g, arm in enumerate(arms):
        if arm.rate_ci is not None:
            interval = kappa_from_rate_ci(arm, data.alpha)
            record.update({f"kappa{g}_lower": interval.lower, f"kappa{g}_upper": interval.upper})
            human.append(f"  arm {g} rate CI: κ in [{interval.lower:.4f}, {interval.upper:.4f}]")

    if phi is not None:
        kappa_qp = kappa_from_quasi_poisson(phi, overall_mean_events(arms))
        kappa_zl = kappa_zhu_lakkis(phi, pooled_event_rate(arms))
        record.update(phi=phi, kappa_quasi_poisson=kappa_qp, kappa_zhu_lakkis=kappa_zl)
        human.append(f"  phi = {phi:.4f}: κ = {kappa_qp:.4f} (pooled-rate version {kappa_zl:.4f})")
    emit([record], config.output_format, "\n".join(human), out)


def _run_tables(config: RunConfig, out: TextIO) -> None:
    tables = build_tables(config.table)
    if config.out_dir is not None:
        for path in write_tables(tables, config.out_dir):
            out.write(f"{path}\n")
        return
    for i, (name, frame) in enumerate(tables.items()):
        if config.output_format is OutputFormat.JSONL:
            for row in frame.to_dict(orient="records"):
                out.write(json.dumps({"table": name, **row}) + "\n")
            continue
        if len(tables) > 1:
            out.write(("\n" if i else "") + f"# {name}\n")
        if config.output_format is OutputFormat.CSV:
            frame.to_csv(out, index=False, lineterminator="\n")
        else:
            out.write(frame.to_string(index=False) + "\n")


HANDLERS = {
    Command.SIZE: _run_size,
    Command.POWER: _run_power,
    Command.SIMULATE: _run_simulate,
    Command.BACKCALC: _run_backcalc,
    Command.TABLES: _run_tables,
}


def run(config: RunConfig, out: Optional[TextIO] = None) -> int:
    """Execute a validated command; returns the process exit status."""
    out = out or sys.stdout
    try:
        HANDLERS[config.command](config, out)
    except NBTrialsError as e:
        logger.error(f"{config.command.value} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return int(ExitCode.RUN_FAILED)
    return int(ExitCode.OK)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=settings.log_level.upper(), stream=sys.stderr)
    setup_logfire()
    try:
        config = parse_and_validate(sys.argv[1:] if argv is None else argv)
    except ConfigValidationError as e:
        print(str(e), file=sys.stderr)
        return e.exit_code
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
