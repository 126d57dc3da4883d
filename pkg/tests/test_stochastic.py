import numpy as np
import pytest
from pydantic import TypeAdapter
from scipy import stats

from src.stochastic import (
    ParamDistribution,
    PointMass,
    Product,
    StandardNormal,
    TruncatedNormal,
    Uniform,
    derive_seed,
    discrete_grid,
    draw,
    truncated_normal_inverse_moments,
)

EXAMPLE1_LAW = Product(
    components=[TruncatedNormal(lo=0.5, hi=3.5, mean=2.0, sd=0.25), Uniform(lo=-1.0, hi=1.0)]
)


class TestSampling:
    def test_same_seed_reproduces_bit_exactly(self):
        a = draw(EXAMPLE1_LAW, 50, seed=7)
        b = draw(EXAMPLE1_LAW, 50, seed=7)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_different_seeds_differ(self):
        a = draw(EXAMPLE1_LAW, 50, seed=7)
        b = draw(EXAMPLE1_LAW, 50, seed=8)
        assert not np.array_equal(a.samples, b.samples)

    def test_shape_and_support(self):
        samples = draw(EXAMPLE1_LAW, 10_000, seed=3).samples
        assert samples.shape == (10_000, 2)
        assert samples[:, 0].min() >= 0.5 and samples[:, 0].max() <= 3.5
        assert samples[:, 1].min() >= -1.0 and samples[:, 1].max() <= 1.0

    def test_truncated_normal_mean(self):
        samples = draw(TruncatedNormal(lo=0.5, hi=3.5, mean=2.0, sd=0.25), 1_000_000, seed=11).samples
        assert samples.mean() == pytest.approx(2.0, abs=1e-3)

    def test_point_mass_is_constant(self):
        samples = draw(PointMass(value=1.5), 5, seed=0).samples
        np.testing.assert_array_equal(samples, np.full((5, 1), 1.5))

    def test_rejects_empty_draw(self):
        with pytest.raises(ValueError):
            draw(StandardNormal(), 0, seed=0)

    def test_derived_seeds_are_distinct(self):
        seeds = {derive_seed(42, N, r) for N in (2, 4, 8) for r in range(1, 11)}
        assert len(seeds) == 30
        assert derive_seed(42, 4, 1) == derive_seed(42, 4, 1)


class TestDiscreteGrid:
    def test_atoms_and_mean(self):
        grid = discrete_grid(((3.0, 5.0), (0.5, 2.5)), k=5)
        assert grid.atoms.shape == (25, 2)
        assert grid.weights.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(grid.mean(), [4.0, 1.5], rtol=1e-14)

    def test_single_atom_is_box_center(self):
        grid = discrete_grid(((3.0, 5.0), (0.5, 2.5)), k=1)
        np.testing.assert_array_equal(grid.atoms, [[4.0, 1.5]])

    def test_samples_are_atoms(self):
        grid = discrete_grid(k=4)
        samples = draw(grid, 200, seed=5).samples
        atoms = {tuple(a) for a in grid.atoms}
        assert all(tuple(s) in atoms for s in samples)


class TestMoments:
    def test_inverse_moments_match_scipy(self):
        lo, hi, mean, sd = 0.5, 3.5, 2.0, 0.25
        law = stats.truncnorm((lo - mean) / sd, (hi - mean) / sd, loc=mean, scale=sd)
        moments = truncated_normal_inverse_moments(lo, hi, mean, sd)
        assert moments["m1"] == pytest.approx(law.expect(lambda x: 1.0 / x), rel=1e-7)
        assert moments["m2"] == pytest.approx(law.expect(lambda x: 1.0 / x**2), rel=1e-7)

    def test_narrow_law_concentrates(self):
        moments = truncated_normal_inverse_moments(0.5, 3.5, 2.0, 1e-8)
        assert moments["m1"] == pytest.approx(0.5, rel=1e-10)
        assert moments["m2"] == pytest.approx(0.25, rel=1e-10)

    def test_inverse_moments_need_positive_support(self):
        with pytest.raises(ValueError):
            truncated_normal_inverse_moments(0.0, 3.5, 2.0, 0.25)

    def test_exp_moment_closed_form(self):
        dist = TruncatedNormal(lo=-3.0, hi=3.0, mean=0.0, sd=1.0)
        assert dist.exp_moment(1.0) == pytest.approx(dist.expect(np.exp), rel=1e-10)
        assert StandardNormal().exp_moment(2.0) == pytest.approx(np.exp(2.0))


class TestConfigForm:
    def test_distribution_parses_from_json(self):
        adapter = TypeAdapter(ParamDistribution)
        dist = adapter.validate_python(
            {
                "kind": "product",
                "components": [
                    {"kind": "truncated_normal", "lo": 0.5, "hi": 3.5, "mean": 2.0, "sd": 0.25},
                    {"kind": "uniform", "lo": -1.0, "hi": 1.0},
                ],
            }
        )
        assert dist == EXAMPLE1_LAW
        assert dist.dim == 2

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            TruncatedNormal(lo=3.0, hi=1.0, mean=2.0, sd=0.25)
        with pytest.raises(ValueError):
            Uniform(lo=1.0, hi=1.0)
