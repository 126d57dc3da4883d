import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.analytic import (
    YD_NORM,
    LognormalDemoSpec,
    OptimalityExampleSpec,
    check_exp_moment_inequality,
    check_hilbert_sum_tail,
    check_threshold,
    chi2_exp_moment,
    dimension_demo_finite,
    dimension_demo_infinite,
    eps_grid_for,
    infinite_second_moment,
    lognormal_gradient_norm,
    lognormal_violation_evidence,
    normal_equation_residual,
    optimal_coefficient,
    optimality_example_errors,
    optimality_gap_constant,
    optimality_tail_table,
    optimality_tau_sq,
    violation_threshold,
)


class TestOptimalityExample:
    def test_tau_gives_exponential_moment_e(self):
        assert chi2_exp_moment(optimality_tau_sq()) == pytest.approx(math.e, abs=1e-12)

    def test_exp_moment_diverges_below_two(self):
        with pytest.raises(ValueError):
            chi2_exp_moment(2.0)

    def test_gap_constant(self):
        gap = optimality_gap_constant()
        assert gap["constant"] == pytest.approx(3.0 * math.e / (math.e - 1.0), rel=1e-14)
        assert abs(gap["constant"] - 4.7459) < 1e-4
        assert gap["exponent_ratio"] == pytest.approx(gap["constant"], abs=1e-12)

    def test_scaled_errors_are_chi_square_two(self):
        spec = OptimalityExampleSpec(alpha=2.0, N=4, replications=100_000, seed=5)
        errors = optimality_example_errors(spec)
        assert errors.shape == (100_000,)
        assert np.mean((spec.alpha * errors) ** 2 * spec.N) == pytest.approx(2.0, rel=2e-2)

    def test_tail_matches_exact_and_bound_dominates(self):
        alpha, N = 1.0, 16
        errors = optimality_example_errors(OptimalityExampleSpec(alpha=alpha, N=N, replications=100_000, seed=7))
        rows = optimality_tail_table(errors, alpha, N, eps_grid_for(alpha, N))
        assert len(rows) == 3
        assert all(row["matches_exact"] for row in rows)
        assert all(row["bound"] >= row["exact"] for row in rows)

    def test_chunked_draws_are_reproducible(self):
        spec = OptimalityExampleSpec(N=8, replications=1_000, seed=3)
        np.testing.assert_array_equal(optimality_example_errors(spec), optimality_example_errors(spec))


class TestLognormal:
    def test_yd_norm(self):
        value, _ = integrate.quad(lambda x: (math.sin(math.pi * x) / math.pi**2) ** 2, 0.0, 1.0)
        assert YD_NORM == pytest.approx(math.sqrt(value), rel=1e-12)

    def test_optimal_coefficient_solves_normal_equation(self):
        expected = -math.pi**2 * math.exp(0.5) / (math.e**2 + math.pi**4 * 1e-3)
        assert optimal_coefficient(1e-3) == pytest.approx(expected, rel=1e-14)
        assert optimal_coefficient(1e-3) == pytest.approx(-2.1736, abs=1e-3)
        assert abs(normal_equation_residual(1e-3)) <= 1e-12

    def test_threshold(self):
        xi_star = violation_threshold(1e-3)
        assert xi_star == pytest.approx(math.log(2.0 * (math.e**2 + math.pi**4 * 1e-3)) - 0.5, rel=1e-14)
        assert check_threshold(1e-3)["violations"] == 0

    def test_gradient_norm_grows_like_exp_past_threshold(self):
        xi = violation_threshold(1e-3) + np.array([0.5, 2.0, 4.0])
        norms = lognormal_gradient_norm(1e-3, xi)
        assert np.all(norms >= np.exp(xi) / math.pi**2 * YD_NORM)

    def test_contrast_unsettled_at_small_counts(self):
        evidence = lognormal_violation_evidence(LognormalDemoSpec(sample_counts=[10, 100, 1_000], batches=2))
        assert not evidence["tau_rows"][0]["contrast_stable"]

    @pytest.mark.slow
    def test_divergence_evidence(self):
        evidence = lognormal_violation_evidence(LognormalDemoSpec(sample_counts=[10_000, 100_000, 1_000_000]))
        row = evidence["tau_rows"][0]
        assert row["log_estimates"][-1] > row["log_estimates"][0]
        assert row["contrast_stable"]


class TestDimension:
    def test_finite_dimension_needs_n_over_eps_samples(self):
        result = dimension_demo_finite(10, 1.0, 0.1, 100_000, seed=1)
        assert result["second_moment"] == pytest.approx(10.0, rel=1e-2)
        rows = {row["N"]: row for row in result["rows"]}
        assert set(rows) == {25, 50, 100, 200, 400}
        assert rows[50]["exceedance"] >= 0.3
        assert rows[400]["exceedance"] < rows[25]["exceedance"]
        assert all(row["chi2_mean"] == pytest.approx(10.0, rel=2e-2) for row in result["rows"])

    def test_sample_mean_follows_chi_square_law(self):
        result = dimension_demo_finite(3, 1.0, 0.5, 200_000, seed=6, N_grid=[4])
        exact = stats.chi2.sf(4 * 0.5, 3)
        observed = result["rows"][0]["exceedance"]
        assert abs(observed - exact) <= 4.0 * math.sqrt(exact * (1.0 - exact) / 200_000)

    def test_basel_second_moment(self):
        assert infinite_second_moment(100_000) == pytest.approx(math.pi**2 / 6.0, abs=1e-4)

    def test_infinite_dimension_bound_holds(self):
        result = dimension_demo_infinite(100, 1.0, 0.5, 0.05, trials=10_000, seed=2)
        assert result["required_N"] == math.ceil(3.0 / 0.5 * math.log(40.0) * result["second_moment"])
        assert result["holds"]


class TestConcentration:
    def test_exponential_moment_inequality(self):
        result = check_exp_moment_inequality(1.0, [0.0, 0.25, 1.0, 3.0], trials=200_000, seed=3)
        assert result["violations"] == 0
        assert result["generator_exp_square_moment"] == pytest.approx(math.e, rel=1e-12)

    def test_hilbert_sum_tail(self):
        result = check_hilbert_sum_tail(2, 10, trials=50_000, seed=4)
        assert result["violations"] == 0
        assert all(row["bound"] >= row["exact"] for row in result["rows"])
        assert result["rows"][0]["empirical"] == 1.0
