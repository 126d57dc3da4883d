import math

import pytest

from src.analysis import (
    bound_hilbert_sum,
    bound_luxemburg,
    bound_mean_square,
    bound_tail_luxemburg,
    bound_tail_pinelis,
    error_radius,
    sample_size_for,
)


class TestClosedForms:
    def test_sample_size(self):
        assert sample_size_for(1.0, 1.0, 0.1, 0.05) == 1107

    def test_luxemburg_bound(self):
        assert bound_luxemburg(1.0, 1.0, 27) == pytest.approx(1.0, abs=1e-12)

    def test_mean_square(self):
        assert bound_mean_square(0.5, 2.0, 4) == pytest.approx(4.0)
        assert bound_mean_square(1.0, 0.0, 10) == 0.0

    def test_tail_capped_at_one(self):
        assert bound_tail_pinelis(1.0, 1.0, 1, 0.0) == 1.0
        assert bound_tail_luxemburg(1.0, 1.0, 1, 0.01) == 1.0

    def test_error_radius_inverts_tail(self):
        eps = error_radius(1e-3, 0.02, 64, 0.05)
        assert bound_tail_pinelis(1e-3, 0.02, 64, eps) == pytest.approx(0.05, rel=1e-12)

    def test_luxemburg_tail_is_weaker(self):
        for eps in (0.1, 1.0, 3.0):
            assert bound_tail_luxemburg(1.0, 1.0, 16, eps) >= bound_tail_pinelis(1.0, 1.0, 16, eps)

    def test_hilbert_sum_variants_agree(self):
        expected = 2.0 * math.exp(-4.0 * 10 / 6.0)
        assert bound_hilbert_sum(math.sqrt(2.0), 10, 2.0) == pytest.approx(expected, rel=1e-12)
        assert bound_hilbert_sum(math.sqrt(2.0), 10, 2.0, variant="cosh") == pytest.approx(expected, rel=1e-12)


class TestValidation:
    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.5])
    def test_delta_range(self, delta):
        with pytest.raises(ValueError):
            sample_size_for(1.0, 1.0, 0.1, delta)

    def test_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            bound_tail_pinelis(0.0, 1.0, 4, 0.1)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            bound_hilbert_sum(1.0, 4, 0.1, variant="gaussian")
