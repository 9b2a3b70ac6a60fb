"""Tests for the normal distribution, quadrature and root-finding primitives."""

import math

import pytest

from backend.nb_trials.core.errors import BracketingError, DomainError, QuadratureAccuracyError
from backend.nb_trials.numeric import (
    QuadratureSpec,
    find_root_bisect,
    integrate,
    normal_cdf,
    normal_quantile,
    solve_quadratic_lower_root,
    z_two_sided,
)


class TestNormal:

    def test_critical_value(self):
        assert z_two_sided(0.05) == pytest.approx(1.959963984540054, abs=1e-12)

    def test_power_quantile(self):
        assert normal_quantile(0.8) == pytest.approx(0.8416212335729143, abs=1e-12)

    def test_cdf_inverts_quantile(self):
        for p in (1e-6, 0.025, 0.5, 0.9, 0.999):
            assert normal_cdf(normal_quantile(p)) == pytest.approx(p, rel=1e-12)

    def test_cdf_far_tail(self):
        assert normal_cdf(-40.0) == pytest.approx(0.0, abs=1e-300)
        assert normal_cdf(40.0) == 1.0

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, float("nan")])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError, match="0 < p < 1"):
            normal_quantile(p)

    def test_alpha_domain(self):
        with pytest.raises(DomainError, match="alpha"):
            z_two_sided(1.0)


class TestIntegrate:

    def test_polynomial(self):
        assert integrate(lambda t: 3 * t**2, 0.0, 2.0) == pytest.approx(8.0, abs=1e-12)

    def test_information_integrand(self):
        # ∫₀^τ λ/(1+κλt)² dt = λτ/(1+κλτ)
        lam, kappa, tau = 0.6, 1.0, 2.0
        value = integrate(lambda t: lam / (1 + kappa * lam * t) ** 2, 0.0, tau)
        assert value == pytest.approx(lam * tau / (1 + kappa * lam * tau), abs=1e-12)

    def test_kink_at_breakpoint(self):
        value = integrate(lambda t: abs(t - 1.0), 0.0, 3.0, breakpoints=[1.0])
        assert value == pytest.approx(2.5, abs=1e-12)

    def test_empty_interval(self):
        assert integrate(math.exp, 1.5, 1.5) == 0.0

    def test_reversed_bounds(self):
        with pytest.raises(DomainError, match="out of order"):
            integrate(math.exp, 2.0, 1.0)

    def test_accuracy_failure_carries_estimate(self):
        spec = QuadratureSpec(abs_tol=1e-14, rel_tol=0.0, max_subdivisions=1)
        with pytest.raises(QuadratureAccuracyError) as err:
            integrate(lambda t: math.sin(50 * t) ** 2, 0.0, 10.0, spec)
        assert math.isfinite(err.value.estimate)
        assert err.value.abs_error > 0


class TestRoots:

    def test_bisect(self):
        root = find_root_bisect(lambda x: x**2 - 2.0, 0.0, 2.0, 1e-10)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-9)

    def test_bisect_endpoint_root(self):
        assert find_root_bisect(lambda x: x - 1.0, 1.0, 3.0, 1e-8) == 1.0

    def test_bisect_no_sign_change(self):
        with pytest.raises(BracketingError, match="sign"):
            find_root_bisect(lambda x: x**2 + 1.0, -1.0, 1.0, 1e-8)

    def test_quadratic_lower_root(self):
        # (x − 1)(x − 3) = x² − 4x + 3
        assert solve_quadratic_lower_root(1.0, -4.0, 3.0) == pytest.approx(1.0, abs=1e-14)

    def test_quadratic_negative_leading(self):
        # −2x² + 2x + 4 = −2(x − 2)(x + 1); the formula's root is (−b − √D)/(2a) = 2
        assert solve_quadratic_lower_root(-2.0, 2.0, 4.0) == pytest.approx(2.0, abs=1e-14)

    def test_quadratic_small_root_without_cancellation(self):
        root = solve_quadratic_lower_root(1.0, -1e8, 1.0)
        assert root == pytest.approx(1e-8, rel=1e-10)

    def test_quadratic_domain(self):
        with pytest.raises(DomainError, match="discriminant"):
            solve_quadratic_lower_root(1.0, 0.0, 1.0)
        with pytest.raises(DomainError, match="leading"):
            solve_quadratic_lower_root(0.0, 1.0, 1.0)
