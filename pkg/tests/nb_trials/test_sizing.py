"""Tests for power and sample size."""

import math

import pytest

from backend.nb_trials.core.config import settings
from backend.nb_trials.core.errors import InfeasibleDesignError, TrialValidationError, UnsupportedComparatorError
from backend.nb_trials.core.models import (
    ArmSpec,
    EffectMetric,
    EffectSummary,
    FollowUpDesign,
    Hypothesis,
    HypothesisKind,
    InfoBound,
    InfoQuantities,
    RoundingMode,
)
from backend.nb_trials.design import follow_up_moments
from backend.nb_trials.numeric import normal_quantile, z_two_sided
from backend.nb_trials.sizing import (
    check_hypothesis,
    effect_summary,
    equiv_power,
    equiv_size,
    equiv_size_bracket,
    equiv_size_by_bisection,
    ni_power,
    ni_size,
    ni_size_factor,
    round_size,
    size_trial,
    split_total,
    translate_margin,
    trial_effect,
    trial_power,
    zhu_equiv_size,
    zhu_ni_size,
    zhu_null_variance,
)

from .conftest import make_trial

ONE_YEAR = FollowUpDesign.fixed(1.0)


def one_year_trial(**kwargs):
    """κ = 0.5, equal unit rates, one year of complete follow-up."""
    return make_trial(1.0, 1.0, kappa0=0.5, design=ONE_YEAR, dropout=0.0, **kwargs)


class TestRounding:

    def test_split_tie_goes_to_control(self):
        assert split_total(7, 0.5) == (4, 3)

    def test_split_largest_remainder(self):
        assert split_total(10, 1 / 3) == (3, 7)
        assert split_total(11, 0.6) == (7, 4)

    def test_round_total(self):
        assert round_size(684.15, 0.5, RoundingMode.TOTAL) == (685, (343, 342))

    def test_round_per_arm(self):
        assert round_size(684.15, 0.5, RoundingMode.PER_ARM) == (686, (343, 343))


class TestNonInferiority:

    def test_one_year_example(self):
        result = size_trial(one_year_trial(), 0.8)
        # d = 2/3 per arm, σ² = 6, n = 6(z₀.₉₇₅ + z₀.₈)²/log²1.3
        expected = 6 * (1.959963984540054 + 0.8416212335729143) ** 2 / math.log(1.3) ** 2
        assert result.n_raw == pytest.approx(expected, rel=1e-9)
        assert result.n_raw == pytest.approx(684.15, abs=0.01)
        assert result.n == 685
        assert result.n_lower == result.n_upper == 685
        assert result.nominal_power_at_n >= 0.8

    def test_one_year_example_per_arm(self):
        result = size_trial(one_year_trial(rounding=RoundingMode.PER_ARM), 0.8)
        assert result.n_per_arm == (343, 343)
        assert result.n == 686

    def test_target_power_defaults_to_setting(self):
        result = size_trial(one_year_trial())
        assert result.target_power == settings.default_power == 0.8
        assert result.n == 685

    def test_margin_one_is_superiority(self):
        ni = size_trial(make_trial(0.6, 0.45, hypothesis=Hypothesis.noninferiority(1.0)), 0.8)
        sup = size_trial(make_trial(0.6, 0.45, hypothesis=Hypothesis.superiority()), 0.8)
        assert ni.n_raw == pytest.approx(sup.n_raw)
        assert ni.n == sup.n

    def test_difference_matches_ratio_at_equal_rates(self):
        md0 = translate_margin(1.3, 0.6, 0.6)
        ratio = size_trial(make_trial(0.6, 0.6), 0.8)
        diff = size_trial(make_trial(0.6, 0.6, hypothesis=Hypothesis.noninferiority(md0, EffectMetric.DIFFERENCE)), 0.8)
        assert diff.n_raw == pytest.approx(ratio.n_raw, rel=1e-12)

    def test_bounds_bracket_size(self, design_two):
        result = size_trial(make_trial(0.9, 0.855, kappa0=1.5, design=design_two, dropout=0.2), 0.8)
        assert result.n_lower <= result.n <= result.n_upper
        assert result.n_lower < result.n_upper

    def test_headline_bound_selection(self):
        trial = make_trial(0.6, 0.57)
        exact = size_trial(trial, 0.8)
        assert size_trial(trial, 0.8, bound=InfoBound.UPPER).n == exact.n_lower
        assert size_trial(trial, 0.8, bound=InfoBound.LOWER).n == exact.n_upper

    def test_coarse_upper_bound_covers_exact(self, design_two):
        result = size_trial(make_trial(0.6, 0.6, kappa0=2.0, design=design_two, dropout=0.2), 0.8)
        assert result.n_upper_coarse is not None
        assert result.n_upper_coarse >= result.n_raw

    def test_unequal_allocation(self):
        balanced = size_trial(make_trial(0.6, 0.6), 0.8)
        skewed = size_trial(make_trial(0.6, 0.6, p0=1 / 3), 0.8)
        assert skewed.n > balanced.n
        assert skewed.n_per_arm[0] < skewed.n_per_arm[1]

    def test_factor_rejects_effect_on_margin(self):
        eff = EffectSummary(kind=HypothesisKind.NONINFERIORITY, metric=EffectMetric.RATIO, beta=0.1, beta_star=0.0, sigma2=4.0)
        with pytest.raises(InfeasibleDesignError):
            ni_size_factor(0.8, eff, 0.05)


class TestPower:

    def test_power_at_sized_n(self):
        trial = make_trial(0.6, 0.57)
        result = size_trial(trial, 0.8)
        at_n = trial_power(trial, result.n)
        assert at_n.power == pytest.approx(result.nominal_power_at_n)
        assert at_n.power >= 0.8
        assert trial_power(trial, result.n - 1).power < 0.8

    def test_power_bounds(self, design_two):
        trial = make_trial(0.6, 0.6, kappa0=2.0, design=design_two, dropout=0.2)
        power = trial_power(trial, 400)
        assert power.power_lower <= power.power <= power.power_upper

    def test_equivalence_power(self):
        trial = make_trial(0.6, 0.63, hypothesis=Hypothesis.equivalence(1.3))
        result = size_trial(trial, 0.8)
        assert trial_power(trial, result.n).power >= 0.8
        assert trial_power(trial, result.n - 1).power < 0.8


class TestEquivalence:

    def test_symmetric_margins_use_closed_form(self):
        trial = make_trial(0.6, 0.6, hypothesis=Hypothesis.equivalence(1.3))
        eff = trial_effect(trial)
        lo, hi = equiv_size_bracket(0.8, eff, 0.05)
        assert lo == pytest.approx(hi)
        assert size_trial(trial, 0.8).n_raw == pytest.approx(hi)

    def test_bisection_inside_bracket(self):
        trial = make_trial(0.6, 0.63, hypothesis=Hypothesis.equivalence(1.3))
        eff = trial_effect(trial)
        lo, hi = equiv_size_bracket(0.8, eff, 0.05)
        n_raw = equiv_size_by_bisection(0.8, eff, 0.05)
        assert lo < n_raw < hi
        assert equiv_power(n_raw, eff, 0.05) == pytest.approx(0.8, abs=1e-6)

    def test_difference_metric(self):
        mdu = translate_margin(1.3, 0.6, 0.63)
        trial = make_trial(0.6, 0.63, hypothesis=Hypothesis.equivalence(mdu, metric=EffectMetric.DIFFERENCE))
        result = size_trial(trial, 0.8)
        assert result.nominal_power_at_n >= 0.8
        assert result.n_zhu is None

    def test_power_floor(self):
        eff = trial_effect(make_trial(0.6, 0.63, hypothesis=Hypothesis.equivalence(1.3)))
        assert equiv_power(1, eff, 0.05) == 0.0


class TestHypothesisChecks:

    def test_superiority_equal_rates(self):
        with pytest.raises(TrialValidationError, match="should be different in a superiority trial"):
            check_hypothesis(Hypothesis.superiority(), 0.6, 0.6)

    def test_ni_ratio_on_margin(self):
        with pytest.raises(TrialValidationError, match="lambda1/lambda0 != Mr0"):
            check_hypothesis(Hypothesis.noninferiority(1.3), 1.0, 1.3)

    def test_ni_difference_on_margin(self):
        with pytest.raises(TrialValidationError, match="lambda1-lambda0 != Md0"):
            check_hypothesis(Hypothesis.noninferiority(0.5, EffectMetric.DIFFERENCE), 1.0, 1.5)

    def test_ni_wrong_side(self):
        with pytest.raises(TrialValidationError, match="wrong side"):
            check_hypothesis(Hypothesis.noninferiority(1.3), 1.0, 1.4)

    def test_equivalence_outside_margins(self):
        with pytest.raises(TrialValidationError, match="Mrl < lambda1/lambda0 < Mru"):
            check_hypothesis(Hypothesis.equivalence(1.3), 1.0, 1.35)
        with pytest.raises(TrialValidationError, match="Mdl < lambda1-lambda0 < Mdu"):
            check_hypothesis(Hypothesis.equivalence(0.1, metric=EffectMetric.DIFFERENCE), 1.0, 0.8)

    def test_size_trial_validates(self):
        with pytest.raises(TrialValidationError):
            size_trial(make_trial(0.6, 0.6, hypothesis=Hypothesis.superiority()), 0.8)

    def test_translate_margin(self):
        assert translate_margin(1.3, 0.6, 0.6) == pytest.approx(0.6 * math.log(1.3))
        with pytest.raises(TrialValidationError):
            translate_margin(0.0, 0.6, 0.6)


class TestMeanFollowUpComparator:

    def test_null_variance_at_truth_on_margin(self, design_one):
        # with λ1 = M λ0 the restricted estimates are the true rates
        trial = make_trial(0.6, 0.78)
        nu = follow_up_moments(design_one, trial.control.dropout_hazard).mean_t
        v0 = zhu_null_variance(HypothesisKind.NONINFERIORITY, 1.3, trial.arms, nu)
        v1 = sum((1.0 + 1.0 / (rate * nu)) / 0.5 for rate in (0.6, 0.78))
        assert v0 == pytest.approx(v1, rel=1e-10)

    def test_ni_comparator_reported(self):
        result = size_trial(make_trial(0.6, 0.6), 0.8)
        assert result.n_zhu is not None
        trial = make_trial(0.6, 0.6)
        assert result.n_zhu == zhu_ni_size(0.8, trial.arms, trial.design, trial.hypothesis, 0.05)

    def test_needs_common_kappa(self):
        trial = make_trial(0.6, 0.6, kappa0=2.0, kappa1=1.0)
        with pytest.raises(UnsupportedComparatorError):
            zhu_ni_size(0.8, trial.arms, trial.design, trial.hypothesis, 0.05)
        assert size_trial(trial, 0.8).n_zhu is None

    def test_needs_ratio_metric(self):
        trial = make_trial(0.6, 0.6, hypothesis=Hypothesis.noninferiority(0.1, EffectMetric.DIFFERENCE))
        with pytest.raises(UnsupportedComparatorError):
            zhu_ni_size(0.8, trial.arms, trial.design, trial.hypothesis, 0.05)

    def test_equivalence_comparator_reaches_power(self):
        trial = make_trial(0.6, 0.63, hypothesis=Hypothesis.equivalence(1.3))
        n = zhu_equiv_size(0.8, trial.arms, trial.design, trial.hypothesis, 0.05)
        assert n == size_trial(trial, 0.8).n_zhu
        with pytest.raises(UnsupportedComparatorError):
            zhu_equiv_size(0.8, trial.arms, trial.design, Hypothesis.noninferiority(1.3), 0.05)


class TestEffectSummary:

    ARMS = (ArmSpec(rate=1.0, kappa=1.0), ArmSpec(rate=0.8, kappa=1.0))
    INFO = (
        InfoQuantities(d=0.6, d_lower=0.5, d_upper=0.7),
        InfoQuantities(d=0.5, d_lower=0.4, d_upper=0.6),
    )

    def test_ratio_noninferiority(self):
        eff = effect_summary(self.ARMS, self.INFO, Hypothesis.noninferiority(1.2))
        assert eff.beta == pytest.approx(math.log(0.8))
        assert eff.beta_star == pytest.approx(math.log(1.5))
        assert eff.sigma2 == pytest.approx(1 / 0.3 + 1 / 0.25)
        assert eff.sigma2_at_d_upper == pytest.approx(1 / 0.35 + 1 / 0.3)
        assert eff.sigma2_at_d_lower == pytest.approx(1 / 0.25 + 1 / 0.2)
        assert eff.delta_a is None and eff.delta_b is None

    def test_bound_selects_sigma2(self):
        eff = effect_summary(self.ARMS, self.INFO, Hypothesis.noninferiority(1.2), InfoBound.LOWER)
        assert eff.sigma2 == pytest.approx(9.0)

    def test_difference_metric(self):
        hypothesis = Hypothesis.noninferiority(0.3, metric=EffectMetric.DIFFERENCE)
        eff = effect_summary(self.ARMS, self.INFO, hypothesis)
        assert eff.beta == pytest.approx(-0.2)
        assert eff.beta_star == pytest.approx(0.5)
        assert eff.sigma2 == pytest.approx(1.0 / 0.3 + 0.64 / 0.25)

    def test_equivalence_distances(self):
        eff = effect_summary(self.ARMS, self.INFO, Hypothesis.equivalence(1.5))
        assert eff.delta_a == pytest.approx(math.log(1.5 / 0.8))
        assert eff.delta_b == pytest.approx(math.log(1 / 1.2))
        assert eff.beta_star is None

    def test_rejects_wrong_side(self):
        with pytest.raises(TrialValidationError):
            effect_summary(self.ARMS, self.INFO, Hypothesis.noninferiority(0.9))


class TestSummaryLevelSizing:

    NI = EffectSummary(
        kind=HypothesisKind.NONINFERIORITY, metric=EffectMetric.RATIO, beta=0.0, beta_star=0.5,
        sigma2=4.0, sigma2_at_d_upper=3.0, sigma2_at_d_lower=5.0,
    )
    EQUIV = EffectSummary(
        kind=HypothesisKind.EQUIVALENCE, metric=EffectMetric.RATIO, beta=0.0, delta_a=0.3, delta_b=-0.3,
        sigma2=4.0, sigma2_at_d_upper=3.0, sigma2_at_d_lower=5.0,
    )

    def test_ni_size_closed_form(self):
        f = (z_two_sided(0.05) + normal_quantile(0.8)) ** 2 / 0.25
        result = ni_size(0.8, self.NI, 0.05)
        assert result.n_raw == pytest.approx(4.0 * f)
        assert result.n == math.ceil(4.0 * f) == 126
        assert result.n_per_arm == (63, 63)
        assert (result.n_lower, result.n_upper) == (math.ceil(3.0 * f), math.ceil(5.0 * f))
        assert result.nominal_power_at_n >= 0.8

    def test_ni_power_at_raw_size(self):
        n_raw = ni_size(0.9, self.NI, 0.05).n_raw
        assert ni_power(n_raw, self.NI, 0.05) == pytest.approx(0.9, abs=1e-9)

    def test_ni_power_ignores_sign(self):
        flipped = self.NI.model_copy(update={"beta_star": -0.5})
        assert ni_power(100, flipped, 0.05) == pytest.approx(ni_power(100, self.NI, 0.05))

    def test_ni_power_needs_ni_summary(self):
        with pytest.raises(TrialValidationError):
            ni_power(100, self.EQUIV, 0.05)

    def test_equiv_size_symmetric(self):
        z_sum = z_two_sided(0.05) + normal_quantile(0.9)
        result = equiv_size(0.8, self.EQUIV, 0.05)
        assert result.n_raw == pytest.approx(4.0 * z_sum**2 / 0.09)
        assert equiv_power(result.n, self.EQUIV, 0.05) >= 0.8
        assert equiv_power(result.n - 1, self.EQUIV, 0.05) < 0.8
        assert result.n_lower <= result.n <= result.n_upper
        assert result.n_zhu is None

    def test_equiv_size_rejects_ni_summary(self):
        with pytest.raises(TrialValidationError):
            equiv_size(0.8, self.NI, 0.05)

    def test_equiv_size_bad_power(self):
        with pytest.raises(TrialValidationError):
            equiv_size(1.0, self.EQUIV, 0.05)
