"""Tests for the command-line surface: parsing, checks, config files and output."""

import io
import json
import math

import pandas as pd
import pytest

from backend.nb_trials.cli.config_loader import Command, ExitCode, OutputFormat, parse_and_validate
from backend.nb_trials.cli.main import main as cli_main, run
from backend.nb_trials.core.errors import ConfigValidationError
from backend.nb_trials.core.models import EffectMetric, HypothesisKind

ONE_YEAR = ["--tauc", "1", "--lambda0", "1", "--lambda1", "1", "--kappa0", "0.5", "--type", "ni", "--mr0", "1.3"]
DESIGN_ONE = ["--tauc", "2", "--lambda0", "0.6", "--lambda1", "0.6", "--kappa0", "1", "--dropout-prop0", "0.25"]
RELAPSE_TRIAL = [
    "--n0", "315", "--events0", "1.1", "--tbar0", "1.8", "--tmax0", "2",
    "--n1", "627", "--events1", "0.4", "--tbar1", "1.88", "--tmax1", "2",
]


def run_jsonl(argv):
    out = io.StringIO()
    assert run(parse_and_validate([*argv, "--format", "jsonl"]), out) == 0
    return [json.loads(line) for line in out.getvalue().splitlines()]


def rejected(argv):
    with pytest.raises(ConfigValidationError) as err:
        parse_and_validate(argv)
    return err.value


class TestValidation:

    @pytest.mark.parametrize(
        "argv, code",
        [
            (["size", *ONE_YEAR, "--power", "0.8", "--metric", "log"], ExitCode.METRIC),
            (["size", *ONE_YEAR, "--power", "0.8", "--type", "superior"], ExitCode.TYPE),
            (["size", "--tauc", "1", "--lambda0=-1", "--lambda1", "1"], ExitCode.NONNEGATIVE),
            (["size", "--lambda0", "1", "--lambda1", "0.8"], ExitCode.NONNEGATIVE),
            (["size", *ONE_YEAR, "--power", "0.8", "--kappa1=-0.5"], ExitCode.NONNEGATIVE),
            (["size", *ONE_YEAR, "--power", "0.8", "--design", "3"], ExitCode.DESIGN),
            (["size", *ONE_YEAR, "--power", "0.8", "--ntot", "600"], ExitCode.POWER_OR_NTOT),
            (["size", *ONE_YEAR, "--power", "0.8", "--power", "1.2"], ExitCode.POWER_OR_NTOT),
            (["size", *ONE_YEAR], ExitCode.POWER_OR_NTOT),
            (["simulate", *ONE_YEAR], ExitCode.POWER_OR_NTOT),
            (["power", *ONE_YEAR], ExitCode.POWER_OR_NTOT),
            (["power", *ONE_YEAR, "--ntot", "600", "--power", "0.8"], ExitCode.POWER_OR_NTOT),
            (["size", *ONE_YEAR, "--power", "0.8", "--design", "2"], ExitCode.ACCRUAL),
            (["size", *ONE_YEAR, "--power", "0.8", "--p0", "1.2"], ExitCode.ALLOCATION),
            (["size", "--tauc", "1", "--lambda0", "1", "--lambda1", "1", "--type", "sup", "--power", "0.8"], ExitCode.SUPERIORITY_RATES),
            (["size", *ONE_YEAR, "--power", "0.8", "--type", "equi", "--metric", "diff", "--mdu", "0.1", "--lambda1", "1.2"], ExitCode.EQUIVALENCE_DIFF),
            (["size", *ONE_YEAR, "--power", "0.8", "--type", "equi"], ExitCode.EQUIVALENCE_RATIO),
            (["size", *ONE_YEAR, "--power", "0.8", "--mr0", "1.0", "--lambda1", "1.0", "--lambda0", "1.0"], ExitCode.NI_RATIO),
            (["size", *ONE_YEAR, "--power", "0.8", "--metric", "diff"], ExitCode.NI_DIFF),
            (["size", *ONE_YEAR, "--power", "0.8", "--droprate0", "0.1", "--dropout-prop0", "0.2"], ExitCode.DROPOUT),
            (["simulate", *ONE_YEAR, "--ntot", "100", "--reps", "0"], ExitCode.SIMULATION),
            (["backcalc", "--n0", "315"], ExitCode.BACKCALC),
            (["backcalc", *RELAPSE_TRIAL], ExitCode.BACKCALC),
        ],
    )
    def test_exit_codes(self, argv, code):
        assert rejected(argv).exit_code == code

    def test_messages(self):
        assert str(rejected(["size", *ONE_YEAR, "--power", "0.8", "--metric", "log"])) == "Metric should be equal to RATIO or DIFF"
        assert str(rejected(["size", *ONE_YEAR, "--power", "0.8", "--design", "3"])) == "Error: design should be equal to 1 or 2"
        assert "lambda0 & lambda1 should be different" in str(
            rejected(["size", "--tauc", "1", "--lambda0", "1", "--lambda1", "1", "--power", "0.8"])
        )

    def test_case_insensitive_type_and_metric(self):
        config = parse_and_validate(["size", *ONE_YEAR, "--power", "0.8", "--type", "NI", "--metric", "RATIO"])
        assert config.trial.hypothesis.kind is HypothesisKind.NONINFERIORITY

    def test_argparse_rejections_exit(self):
        with pytest.raises(SystemExit):
            parse_and_validate(["size", "--lambda0", "abc"])


class TestDefaults:

    def test_size_defaults(self):
        config = parse_and_validate(["size", *ONE_YEAR, "--power", "0.8"])
        assert config.command is Command.SIZE
        assert config.output_format is OutputFormat.HUMAN
        assert config.target_power == 0.8
        trial = config.trial
        assert trial.alpha == 0.05
        assert trial.active.kappa == 0.5
        assert trial.control.allocation == 0.5
        assert not trial.design.is_staggered

    def test_superiority_is_the_default_type(self):
        config = parse_and_validate(["size", "--tauc", "1", "--lambda0", "1", "--lambda1", "0.8", "--power", "0.8"])
        assert config.trial.hypothesis.kind is HypothesisKind.SUPERIORITY
        assert config.trial.hypothesis.margin_ni == 1.0

    def test_ratio_equivalence_lower_margin(self):
        config = parse_and_validate(["size", *ONE_YEAR, "--power", "0.8", "--type", "equi", "--mru", "1.3"])
        assert config.trial.hypothesis.margin_lower == pytest.approx(1 / 1.3)

    def test_difference_equivalence_lower_margin(self):
        config = parse_and_validate(["size", *ONE_YEAR, "--power", "0.8", "--type", "equi", "--metric", "diff", "--mdu", "0.2"])
        h = config.trial.hypothesis
        assert h.metric is EffectMetric.DIFFERENCE
        assert h.margin_lower == pytest.approx(-0.2)

    def test_dropout_proportion_and_active_arm_defaults(self):
        config = parse_and_validate(["size", *DESIGN_ONE, "--type", "ni", "--mr0", "1.3", "--power", "0.8"])
        control, active = config.trial.arms
        assert control.dropout_hazard == pytest.approx(-math.log(0.75) / 2)
        assert active.dropout_hazard == control.dropout_hazard
        assert active.kappa == control.kappa == 1.0

    def test_dropout_horizon(self):
        config = parse_and_validate(
            ["size", *DESIGN_ONE, "--type", "ni", "--mr0", "1.3", "--power", "0.8", "--dropout-horizon", "1"]
        )
        assert config.trial.control.dropout_hazard == pytest.approx(-math.log(0.75))

    def test_staggered_design(self):
        config = parse_and_validate(["size", *ONE_YEAR, "--power", "0.8", "--design", "2", "--taua", "2", "--eta", "0.5"])
        design = config.trial.design
        assert design.is_staggered
        assert (design.tau_a, design.tau_c, design.eta) == (2.0, 1.0, 0.5)

    def test_simulate_at_sizing_power(self):
        config = parse_and_validate(["simulate", *ONE_YEAR, "--power", "0.8"])
        assert config.target_power == 0.8
        assert config.ntot is None
        assert not config.simulate_null


class TestConfigFile:

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "trial.env"
        path.write_text("lambda0=0.6\nlambda1=0.6\nkappa0=1\ntauc=2\ntype=ni\nmr0=1.3\ndropout-prop0=0.25\npower=0.8\nntot=.\n")
        config = parse_and_validate(["size", "--mr0", "1.2"], config_file=path)
        assert config.trial.hypothesis.margin_ni == 1.2
        assert config.trial.control.rate == 0.6

    def test_config_flag(self, tmp_path):
        path = tmp_path / "sim.env"
        path.write_text("lambda0=0.6\nlambda1=0.6\nkappa0=1\ntauc=2\ntype=ni\nmr0=1.3\nnull=true\nreps=50\nntot=200\n")
        config = parse_and_validate(["--config", str(path), "simulate", "--seed", "4"])
        assert config.simulate_null
        assert config.replications == 50
        assert config.seed == 4

    def test_pair_values(self, tmp_path):
        path = tmp_path / "ms.env"
        path.write_text(
            "n0=315\nevents0=1.1\ntbar0=1.8\ntmax0=2\nn1=627\nevents1=0.4\ntbar1=1.88\ntmax1=2\nratio-ci=0.252,0.389\n"
        )
        config = parse_and_validate(["backcalc"], config_file=path)
        assert config.backcalc.ratio_ci == (0.252, 0.389)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.env"
        path.write_text("lambda0=0.6\nlamda1=0.6\n")
        err = rejected_with_file(["size"], path)
        assert err.exit_code == ExitCode.CONFIG_FILE
        assert "lamda1" in str(err)

    def test_missing_file(self, tmp_path):
        err = rejected_with_file(["size"], tmp_path / "absent.env")
        assert err.exit_code == ExitCode.CONFIG_FILE


def rejected_with_file(argv, path):
    with pytest.raises(ConfigValidationError) as err:
        parse_and_validate(argv, config_file=path)
    return err.value


class TestCommands:

    def test_size(self):
        (record,) = run_jsonl(["size", *ONE_YEAR, "--power", "0.8"])
        assert record["command"] == "size"
        assert record["n"] == 685
        assert record["n_raw"] == pytest.approx(684.15, abs=0.01)
        assert record["n_per_arm"] == [343, 342]

    def test_size_per_arm_rounding(self):
        (record,) = run_jsonl(["size", *ONE_YEAR, "--power", "0.8", "--rounding", "per-arm"])
        assert record["n"] == 686

    def test_size_human(self):
        out = io.StringIO()
        run(parse_and_validate(["size", *ONE_YEAR, "--power", "0.8"]), out)
        text = out.getvalue()
        assert "n = 685 (343 + 342)" in text
        assert "arm 0: d=0.666667" in text

    def test_size_csv(self):
        out = io.StringIO()
        run(parse_and_validate(["size", *ONE_YEAR, "--power", "0.8", "--format", "csv"]), out)
        frame = pd.read_csv(io.StringIO(out.getvalue()))
        assert frame.loc[0, "n"] == 685
        assert frame.loc[0, "n_per_arm0"] == 343
        assert frame.loc[0, "target_power"] == pytest.approx(80.0)

    def test_power(self):
        (record,) = run_jsonl(["power", *ONE_YEAR, "--ntot", "685"])
        assert record["n"] == 685
        assert record["power"] >= 0.8
        (below,) = run_jsonl(["power", *ONE_YEAR, "--ntot", "684"])
        assert below["power"] < 0.8

    def test_simulate(self):
        (record,) = run_jsonl(["simulate", *ONE_YEAR, "--ntot", "100", "--reps", "5", "--seed", "3"])
        assert record["replications"] == 5
        assert record["n"] == 100
        assert record["seed"] == 3

    def test_backcalc_ratio_ci(self):
        (record,) = run_jsonl(["backcalc", *RELAPSE_TRIAL, "--ratio-ci", "0.252", "0.389"])
        assert record["kappa_lower"] == pytest.approx(1.033, abs=5e-3)
        assert record["kappa_upper"] == pytest.approx(1.131, abs=5e-3)
        assert record["phi"] > 1

    def test_backcalc_phi(self):
        (record,) = run_jsonl(["backcalc", *RELAPSE_TRIAL, "--phi", "1.828"])
        assert record["kappa_quasi_poisson"] == pytest.approx(1.306, abs=2e-3)
        assert record["kappa_zhu_lakkis"] == pytest.approx(2.420, abs=1e-3)
        assert "kappa_lower" not in record

    def test_tables_csv(self, paper_table):
        out = io.StringIO()
        run(parse_and_validate(["tables", "--which", "equivalence", "--format", "csv"]), out)
        frame = pd.read_csv(io.StringIO(out.getvalue()))
        assert frame["n_r"].tolist() == paper_table("equivalence")["n_r"].tolist()

    def test_tables_to_directory(self, tmp_path):
        out = io.StringIO()
        run(parse_and_validate(["tables", "--which", "equivalence", "--out", str(tmp_path)]), out)
        assert out.getvalue().strip() == str(tmp_path / "equivalence.csv")
        assert (tmp_path / "equivalence.csv").is_file()

    def test_run_failure_returns_one(self):
        config = parse_and_validate(["size", *ONE_YEAR, "--power", "0.8", "--lambda1", "1.4"])
        assert run(config, io.StringIO()) == ExitCode.RUN_FAILED


class TestMain:

    def test_exit_code_and_message(self, capsys):
        assert cli_main(["size", *ONE_YEAR, "--power", "0.8", "--design", "3"]) == ExitCode.DESIGN
        assert "design should be equal to 1 or 2" in capsys.readouterr().err

    def test_success(self, capsys):
        assert cli_main(["size", *ONE_YEAR, "--power", "0.8", "--format", "jsonl"]) == 0
        assert json.loads(capsys.readouterr().out)["n"] == 685
