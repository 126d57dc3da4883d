import math

import numpy as np
import pytest

from src.analysis import (
    error_statistics,
    exceedance,
    exceedance_grid,
    exceedance_table,
    fit_rate,
    luxemburg_estimate,
    luxemburg_moment,
    sigma_tau_from_deviations,
)


class TestLuxemburg:
    def test_single_error(self):
        assert luxemburg_estimate([2.0]) == pytest.approx(2.0 / math.sqrt(math.log(2.0)), rel=1e-14)

    def test_equal_errors(self):
        assert luxemburg_estimate([1.0, 1.0, 1.0]) == pytest.approx(1.0 / math.sqrt(math.log(2.0)), rel=1e-10)

    def test_all_zero(self):
        assert luxemburg_estimate([0.0, 0.0]) == 0.0

    def test_estimate_solves_moment_equation(self, rng):
        errors = rng.exponential(size=200)
        nu = luxemburg_estimate(errors)
        assert luxemburg_moment(errors, nu) == pytest.approx(1.0, rel=1e-8)

    def test_homogeneous(self, rng):
        errors = rng.exponential(size=50)
        assert luxemburg_estimate(3.0 * errors) == pytest.approx(3.0 * luxemburg_estimate(errors), rel=1e-9)

    def test_large_errors_do_not_overflow(self):
        nu = luxemburg_estimate([1e-3, 1.0, 30.0])
        assert math.isfinite(nu) and nu > 0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            luxemburg_estimate([1.0, -0.1])


class TestFitRate:
    def test_recovers_exact_power_law(self):
        N = [2, 4, 8, 16, 32]
        fit = fit_rate(N, [3.0 / math.sqrt(n) for n in N])
        assert fit["rate"] == pytest.approx(-0.5, abs=1e-12)
        assert math.exp(fit["logC"]) == pytest.approx(3.0, abs=1e-12)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            fit_rate([4], [1.0])


class TestSigmaTau:
    def test_constant_deviations(self):
        result = sigma_tau_from_deviations([0.3] * 5)
        assert result["sigma_hat"] == pytest.approx(0.3)
        assert result["tau_hat"] == pytest.approx(0.3)

    def test_tau_satisfies_exponential_condition(self, rng):
        d = rng.rayleigh(size=1000)
        result = sigma_tau_from_deviations(d)
        assert result["tau_hat"] >= result["sigma_hat"]
        assert np.mean(np.exp((d / result["tau_hat"]) ** 2)) <= math.e * (1.0 + 1e-4)

    def test_single_outlier(self):
        result = sigma_tau_from_deviations([1.0, 0.0, 0.0, 0.0])
        assert result["sigma_hat"] == pytest.approx(0.5)
        assert 0.5 < result["tau_hat"] < 1.0


class TestExceedance:
    def test_fraction_and_standard_error(self):
        stats = exceedance([0.1, 0.2, 0.3, 0.4], 0.25)
        assert stats["fraction"] == 0.5
        assert stats["standard_error"] == pytest.approx(0.25)

    def test_grid_at_quantiles(self):
        grid = exceedance_grid(np.arange(101.0))
        assert grid == pytest.approx([50.0, 75.0, 90.0])

    def test_table_rows(self):
        rows = exceedance_table({4: [0.1, 0.2], 16: [0.05, 0.06]}, [0.08], alpha=1.0, tau=0.1)
        assert [(row["N"], row["fraction"]) for row in rows] == [(4, 1.0), (16, 0.0)]
        assert all(0.0 <= row["bound"] <= 1.0 for row in rows)

    def test_error_statistics(self):
        stats = error_statistics([1.0, 3.0])
        assert stats["mean_error"] == 2.0
        assert stats["mse"] == 5.0
        assert stats["luxemburg"] > 0
