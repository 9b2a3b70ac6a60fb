"""Command-line parsing, config-file merging and parameter checks."""

from __future__ import annotations

import argparse
import logging
from enum import Enum, IntEnum
from pathlib import Path
from typing import NoReturn, Optional, Sequence

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError

from ..core.config import settings
from ..core.errors import ConfigValidationError, DomainError
from ..core.models import (
    AnalysisModel,
    ArmSpec,
    DispersionMode,
    EffectMetric,
    FollowUpDesign,
    Hypothesis,
    HypothesisKind,
    RoundingMode,
    TrialSpec,
)
from ..design.follow_up import dropout_proportion_to_hazard
from ..summary.back_calculation import PublishedArmSummary

logger = logging.getLogger(__name__)

TRUTHY = {"1", "true", "yes", "on"}


class Command(str, Enum):
    SIZE = "size"
    POWER = "power"
    SIMULATE = "simulate"
    BACKCALC = "backcalc"
    TABLES = "tables"


class OutputFormat(str, Enum):
    HUMAN = "human"
    JSONL = "jsonl"
    CSV = "csv"


class TableName(str, Enum):
    NI_DESIGN1 = "ni-design1"
    NI_DESIGN2 = "ni-design2"
    HETEROGENEOUS = "heterogeneous"
    EQUIVALENCE = "equivalence"
    ALL = "all"


class ExitCode(IntEnum):
    """Process exit status per rejected configuration."""
    OK = 0
    RUN_FAILED = 1
    INVALID = 2
    METRIC = 10
    TYPE = 11
    NONNEGATIVE = 12
    DESIGN = 13
    POWER_OR_NTOT = 14
    ACCRUAL = 15
    ALLOCATION = 16
    SUPERIORITY_RATES = 17
    EQUIVALENCE_DIFF = 18
    EQUIVALENCE_RATIO = 19
    NI_RATIO = 20
    NI_DIFF = 21
    DROPOUT = 22
    CONFIG_FILE = 23
    SIMULATION = 24
    BACKCALC = 25


MESSAGES = {
    ExitCode.METRIC: "Metric should be equal to RATIO or DIFF",
    ExitCode.TYPE: "Type should be equal to SUP, NI or EQUI",
    ExitCode.NONNEGATIVE: (
        "Error: droprate0/droprate1,lambda0/lambda1,kappa0/kappa1, tauc shall be non-negative or positive"
    ),
    ExitCode.DESIGN: "Error: design should be equal to 1 or 2",
    ExitCode.POWER_OR_NTOT: "Error: there should be either 0<power<1, ntot=. OR ntot>0 & power=.",
    ExitCode.ACCRUAL: "Error: taua must be >0 in design 2",
    ExitCode.ALLOCATION: "Error: p0 the proportion of subject in control arm must be between 0 and 1",
    ExitCode.SUPERIORITY_RATES: "Error: lambda0 & lambda1 should be different in a superiority trial",
    ExitCode.EQUIVALENCE_DIFF: "Error: Equivalence DIFF margin must satisfy Mdl< lambda1-lambda0<Mdu, Mdu^=.",
    ExitCode.EQUIVALENCE_RATIO: "Error: Equivalence RATIO margin must satisfy Mrl< lambda1/lambda0<Mru, Mru^=.",
    ExitCode.NI_RATIO: "Error: NI RATIO Margin must satisfy Mr0>0 & lambda1/lambda0^= Mr0",
    ExitCode.NI_DIFF: "Error: NI DIFF margin must satisfy MD0^=. and lambda1-lambda0^= Md0",
}


class BackcalcInput(BaseModel):
    """Published summaries handed to the κ back-calculation."""

    arms: tuple[PublishedArmSummary, PublishedArmSummary]
    ratio_ci: Optional[tuple[float, float]] = None
    phi: Optional[float] = Field(None, gt=0)
    alpha: float = Field(default=0.05, gt=0, lt=1)


class RunConfig(BaseModel):
    """A validated command ready for ``run``."""

    command: Command
    output_format: OutputFormat = OutputFormat.HUMAN
    trial: Optional[TrialSpec] = None
    ntot: Optional[int] = Field(None, ge=1)
    target_power: Optional[float] = Field(None, gt=0, lt=1)

    # simulate
    seed: Optional[int] = None
    replications: Optional[int] = Field(None, ge=1)
    workers: Optional[int] = Field(None, ge=1)
    analysis: AnalysisModel = AnalysisModel.NB
    dispersion_mode: Optional[DispersionMode] = None
    simulate_null: bool = False

    # backcalc
    backcalc: Optional[BackcalcInput] = None

    # tables
    table: TableName = TableName.ALL
    out_dir: Optional[Path] = None


def _fail(code: ExitCode, message: Optional[str] = None, field: Optional[str] = None) -> NoReturn:
    raise ConfigValidationError(message or MESSAGES[code], exit_code=int(code), field=field)


# ============================================================================
# Parser
# ============================================================================


def _trial_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("trial")
    g.add_argument("--design", type=int, help="1: fixed follow-up tauc; 2: accrual over taua then tauc")
    g.add_argument("--tauc", type=float)
    g.add_argument("--taua", type=float)
    g.add_argument("--eta", type=float, help="Entry density shape; 0 is uniform")
    g.add_argument("--lambda0", type=float)
    g.add_argument("--lambda1", type=float)
    g.add_argument("--kappa0", type=float)
    g.add_argument("--kappa1", type=float, help="Defaults to kappa0")
    g.add_argument("--droprate0", type=float, help="Exponential dropout hazard")
    g.add_argument("--droprate1", type=float, help="Defaults to the control dropout")
    g.add_argument("--dropout-prop0", type=float, help="Proportion lost by --dropout-horizon")
    g.add_argument("--dropout-prop1", type=float)
    g.add_argument("--dropout-horizon", type=float, help="Defaults to the trial duration")
    g.add_argument("--p0", type=float, help="Proportion randomised to control")
    g.add_argument("--alpha", type=float)
    g.add_argument("--power", type=float)
    g.add_argument("--ntot", type=int)
    g.add_argument("--type", help="sup, ni or equi")
    g.add_argument("--metric", help="ratio or diff")
    g.add_argument("--mr0", type=float)
    g.add_argument("--mru", type=float)
    g.add_argument("--mrl", type=float, help="Defaults to 1/mru")
    g.add_argument("--md0", type=float)
    g.add_argument("--mdu", type=float)
    g.add_argument("--mdl", type=float, help="Defaults to -mdu")
    g.add_argument("--rounding", choices=[m.value for m in RoundingMode])
    return p


def _output_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat])
    return p


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    """Top-level parser and the subparser of each command."""
    parser = argparse.ArgumentParser(
        prog="nb-trials",
        description="Sample size, power and simulation for negative binomial rate comparisons.",
    )
    parser.add_argument("--config", type=Path, help="key=value file; command-line flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    trial, output = _trial_options(), _output_options()
    commands = {
        Command.SIZE.value: sub.add_parser("size", parents=[trial, output], help="Sample size at a target power"),
        Command.POWER.value: sub.add_parser("power", parents=[trial, output], help="Nominal power at ntot"),
        Command.SIMULATE.value: sub.add_parser("simulate", parents=[trial, output], help="Monte Carlo power or type I error"),
        Command.BACKCALC.value: sub.add_parser("backcalc", parents=[output], help="κ from published summaries"),
        Command.TABLES.value: sub.add_parser("tables", parents=[output], help="Regenerate the design tables"),
    }

    simulate = commands[Command.SIMULATE.value]
    simulate.add_argument("--reps", type=int)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--workers", type=int)
    simulate.add_argument("--analysis", choices=[a.value for a in AnalysisModel])
    simulate.add_argument("--dispersion", choices=[m.value for m in DispersionMode])
    simulate.add_argument("--null", action="store_true", help="Simulate on the boundary of H0")

    backcalc = commands[Command.BACKCALC.value]
    for g in (0, 1):
        backcalc.add_argument(f"--n{g}", type=int, help=f"Subjects in arm {g}")
        backcalc.add_argument(f"--events{g}", type=float, help="Mean events per subject")
        backcalc.add_argument(f"--tbar{g}", type=float, help="Mean follow-up")
        backcalc.add_argument(f"--tmax{g}", type=float, help="Maximum follow-up")
        backcalc.add_argument(f"--rate-ci{g}", type=float, nargs=2, metavar=("LOWER", "UPPER"))
    backcalc.add_argument("--ratio-ci", type=float, nargs=2, metavar=("LOWER", "UPPER"))
    backcalc.add_argument("--phi", type=float, help="Pearson dispersion of a quasi-Poisson fit")
    backcalc.add_argument("--alpha", type=float)

    tables = commands[Command.TABLES.value]
    tables.add_argument("--which", choices=[t.value for t in TableName])
    tables.add_argument("--out", type=Path, help="Directory for <table>.csv files; stdout when omitted")
    return parser, commands


def _normalise_key(key: str) -> str:
    return key.strip().lstrip("-").lower().replace("-", "_")


def config_file_tokens(path: Path, subparser: argparse.ArgumentParser) -> list[str]:
    """Flags equivalent to the key=value pairs of a config file."""
    if not path.is_file():
        _fail(ExitCode.CONFIG_FILE, f"Error: config file {path} not found")

    by_key = {
        _normalise_key(option): action
        for action in subparser._actions
        for option in action.option_strings
        if option.startswith("--")
    }
    tokens: list[str] = []
    for key, raw in dotenv_values(path).items():
        action = by_key.get(_normalise_key(key))
        if action is None or action.dest == "help":
            _fail(ExitCode.CONFIG_FILE, f"Error: unknown key '{key}' in {path}", field=key)
        if raw is None or raw.strip() in ("", "."):
            continue
        flag = action.option_strings[-1]
        if action.nargs == 0:
            if raw.strip().lower() in TRUTHY:
                tokens.append(flag)
        elif action.nargs == 2:
            tokens += [flag, *raw.replace(",", " ").split()]
        else:
            tokens += [flag, raw.strip()]
    logger.debug(f"config file {path}: {tokens}")
    return tokens


# ============================================================================
# Validation
# ============================================================================


def _dropout_hazards(ns: argparse.Namespace, horizon: float) -> tuple[float, float]:
    hazards: list[Optional[float]] = []
    for g in (0, 1):
        rate = getattr(ns, f"droprate{g}")
        prop = getattr(ns, f"dropout_prop{g}")
        if rate is not None and prop is not None:
            _fail(ExitCode.DROPOUT, f"Error: give droprate{g} or dropout-prop{g}, not both", field=f"droprate{g}")
        if prop is not None:
            try:
                rate = dropout_proportion_to_hazard(prop, horizon)
            except DomainError:
                _fail(ExitCode.NONNEGATIVE, field=f"dropout_prop{g}")
        hazards.append(rate)
    hazard0 = hazards[0] if hazards[0] is not None else 0.0
    hazard1 = hazards[1] if hazards[1] is not None else hazard0
    return hazard0, hazard1


def _check_power_ntot(command: Command, power: Optional[float], ntot: Optional[int]) -> None:
    if power is not None and not 0 < power < 1:
        _fail(ExitCode.POWER_OR_NTOT, field="power")
    if ntot is not None and ntot <= 0:
        _fail(ExitCode.POWER_OR_NTOT, field="ntot")
    if power is not None and ntot is not None:
        _fail(ExitCode.POWER_OR_NTOT)
    if command is Command.SIZE and ntot is not None:
        _fail(ExitCode.POWER_OR_NTOT, field="ntot")
    if command is Command.POWER and ntot is None:
        _fail(ExitCode.POWER_OR_NTOT, field="ntot")
    if command in (Command.SIZE, Command.SIMULATE) and power is None and ntot is None:
        _fail(ExitCode.POWER_OR_NTOT)


def _check_margins(kind: HypothesisKind, metric: EffectMetric, ns: argparse.Namespace) -> tuple:
    """Macro-order checks of rates against margins; returns (margin_ni, lower, upper)."""
    lambda0, lambda1 = ns.lambda0, ns.lambda1
    ratio, diff = lambda1 / lambda0, lambda1 - lambda0
    is_ratio = metric is EffectMetric.RATIO

    if kind is HypothesisKind.SUPERIORITY:
        if lambda0 == lambda1:
            _fail(ExitCode.SUPERIORITY_RATES)
        return None, None, None

    if kind is HypothesisKind.EQUIVALENCE:
        if is_ratio:
            upper = ns.mru
            lower = ns.mrl if ns.mrl is not None else (1.0 / upper if upper else None)
            if upper is None or lower is None or not lower < ratio < upper:
                _fail(ExitCode.EQUIVALENCE_RATIO)
        else:
            upper = ns.mdu
            lower = ns.mdl if ns.mdl is not None else (-upper if upper is not None else None)
            if upper is None or not lower < diff < upper:
                _fail(ExitCode.EQUIVALENCE_DIFF)
        return None, lower, upper

    if is_ratio:
        if ns.mr0 is None or ns.mr0 <= 0 or ratio == ns.mr0:
            _fail(ExitCode.NI_RATIO)
        return ns.mr0, None, None
    if ns.md0 is None or diff == ns.md0:
        _fail(ExitCode.NI_DIFF)
    return ns.md0, None, None


def build_trial(ns: argparse.Namespace, command: Command) -> TrialSpec:
    """TrialSpec from parsed flags, applying the defaulting rules and checks in macro order."""
    metric_name = (ns.metric or "ratio").strip().lower()
    if metric_name not in {m.value for m in EffectMetric}:
        _fail(ExitCode.METRIC, field="metric")
    kind_name = (ns.type or "sup").strip().lower()
    if kind_name not in {k.value for k in HypothesisKind}:
        _fail(ExitCode.TYPE, field="type")
    metric, kind = EffectMetric(metric_name), HypothesisKind(kind_name)

    for name in ("lambda0", "lambda1", "tauc"):
        if getattr(ns, name) is None:
            _fail(ExitCode.NONNEGATIVE, f"Error: missing required parameter {name}", field=name)
    kappa0 = ns.kappa0 if ns.kappa0 is not None else 0.0
    kappa1 = ns.kappa1 if ns.kappa1 is not None else kappa0
    negative_rates = [v for v in (ns.droprate0, ns.droprate1) if v is not None and v < 0]
    if negative_rates or ns.lambda0 <= 0 or ns.lambda1 <= 0 or kappa0 < 0 or kappa1 < 0 or ns.tauc <= 0:
        _fail(ExitCode.NONNEGATIVE)

    design_no = ns.design if ns.design is not None else 1
    if design_no not in (1, 2):
        _fail(ExitCode.DESIGN, field="design")

    _check_power_ntot(command, ns.power, ns.ntot)

    if design_no == 2:
        if ns.taua is None or ns.taua <= 0:
            _fail(ExitCode.ACCRUAL, field="taua")
        design = FollowUpDesign.staggered(ns.taua, ns.tauc, ns.eta or 0.0)
    else:
        design = FollowUpDesign.fixed(ns.tauc)

    p0 = ns.p0 if ns.p0 is not None else 0.5
    if not 0 < p0 < 1:
        _fail(ExitCode.ALLOCATION, field="p0")

    margin_ni, lower, upper = _check_margins(kind, metric, ns)
    horizon = ns.dropout_horizon if ns.dropout_horizon is not None else design.total_duration
    hazard0, hazard1 = _dropout_hazards(ns, horizon)

    try:
        hypothesis = Hypothesis(
            kind=kind, metric=metric, margin_ni=margin_ni, margin_lower=lower, margin_upper=upper
        )
    except ValidationError as e:
        code = {
            (HypothesisKind.EQUIVALENCE, EffectMetric.RATIO): ExitCode.EQUIVALENCE_RATIO,
            (HypothesisKind.EQUIVALENCE, EffectMetric.DIFFERENCE): ExitCode.EQUIVALENCE_DIFF,
            (HypothesisKind.NONINFERIORITY, EffectMetric.RATIO): ExitCode.NI_RATIO,
        }.get((kind, metric), ExitCode.NI_DIFF)
        logger.debug(f"hypothesis rejected: {e}")
        _fail(code)

    try:
        return TrialSpec(
            control=ArmSpec(rate=ns.lambda0, kappa=kappa0, allocation=p0, dropout_hazard=hazard0),
            active=ArmSpec(rate=ns.lambda1, kappa=kappa1, allocation=1.0 - p0, dropout_hazard=hazard1),
            design=design,
            hypothesis=hypothesis,
            alpha=ns.alpha if ns.alpha is not None else settings.default_alpha,
            rounding=RoundingMode(ns.rounding or settings.rounding),
        )
    except ValidationError as e:
        _fail(ExitCode.INVALID, f"Error: invalid trial parameters: {e.errors()[0]['msg']}")


def build_backcalc(ns: argparse.Namespace) -> BackcalcInput:
    arm_fields = ("n", "events", "tbar", "tmax")
    missing = [f"{f}{g}" for g in (0, 1) for f in arm_fields if getattr(ns, f"{f}{g}") is None]
    if missing:
        _fail(ExitCode.BACKCALC, f"Error: backcalc needs {', '.join(missing)}", field=missing[0])
    if ns.ratio_ci is None and ns.rate_ci0 is None and ns.rate_ci1 is None and ns.phi is None:
        _fail(ExitCode.BACKCALC, "Error: backcalc needs --ratio-ci, --rate-ci0/--rate-ci1 or --phi")
    try:
        arms = tuple(
            PublishedArmSummary(
                n=getattr(ns, f"n{g}"),
                mean_events=getattr(ns, f"events{g}"),
                mean_followup=getattr(ns, f"tbar{g}"),
                max_followup=getattr(ns, f"tmax{g}"),
                rate_ci=tuple(getattr(ns, f"rate_ci{g}")) if getattr(ns, f"rate_ci{g}") else None,
            )
            for g in (0, 1)
        )
        return BackcalcInput(
            arms=arms,
            ratio_ci=tuple(ns.ratio_ci) if ns.ratio_ci else None,
            phi=ns.phi,
            alpha=ns.alpha if ns.alpha is not None else settings.default_alpha,
        )
    except ValidationError as e:
        _fail(ExitCode.BACKCALC, f"Error: invalid published summary: {e.errors()[0]['msg']}")


def parse_and_validate(argv: Sequence[str], config_file: Optional[Path] = None) -> RunConfig:
    """Parse flags (merged over an optional key=value config file) into a RunConfig.

    Raises:
        ConfigValidationError: A check failed; ``exit_code`` identifies which
        SystemExit: argparse rejected the command line
    """
    argv = list(argv)
    parser, commands = build_parser()
    ns = parser.parse_args(argv)
    config_file = config_file or ns.config
    if config_file is not None:
        tokens = config_file_tokens(Path(config_file), commands[ns.command])
        at = argv.index(ns.command) + 1
        ns = parser.parse_args(argv[:at] + tokens + argv[at:])

    command = Command(ns.command)
    fields: dict = {"command": command}
    if ns.output_format:
        fields["output_format"] = OutputFormat(ns.output_format)

    if command in (Command.SIZE, Command.POWER, Command.SIMULATE):
        fields["trial"] = build_trial(ns, command)
        fields["ntot"] = ns.ntot
        fields["target_power"] = ns.power

    if command is Command.SIMULATE:
        if ns.reps is not None and ns.reps < 1:
            _fail(ExitCode.SIMULATION, "Error: reps must be >= 1", field="reps")
        if ns.workers is not None and ns.workers < 1:
            _fail(ExitCode.SIMULATION, "Error: workers must be >= 1", field="workers")
        fields.update(
            seed=ns.seed,
            replications=ns.reps,
            workers=ns.workers,
            analysis=AnalysisModel(ns.analysis or AnalysisModel.NB.value),
            dispersion_mode=DispersionMode(ns.dispersion) if ns.dispersion else None,
            simulate_null=ns.null,
        )
    elif command is Command.BACKCALC:
        fields["backcalc"] = build_backcalc(ns)
    elif command is Command.TABLES:
        fields["table"] = TableName(ns.which or TableName.ALL.value)
        fields["out_dir"] = ns.out

    return RunConfig(**fields)
