import math

import numpy as np
import pytest

from sndsim import noisemodel as nm
from sndsim.errors import ParameterError
from sndsim.numerics import GAUSS_FWHM_OVER_SIGMA


@pytest.fixture(scope="module")
def heights12():
    return nm.element_heights(nm.HeightProfile(1.0, 0.1), 12)


class TestElementHeights:
    def test_zero_width_degenerate(self):
        h = nm.element_heights(nm.HeightProfile(1.0, 0.0), 12)
        assert np.all(h.heights == 1.0)

    def test_quantile_symmetry(self, heights12):
        pair_sums = heights12.heights + heights12.heights[::-1]
        assert np.max(np.abs(pair_sums - 2.0)) < 1e-12

    def test_mean_equals_center(self, heights12):
        assert abs(heights12.heights.mean() - 1.0) < 1e-12

    def test_population_std_near_profile(self, heights12):
        target = 0.1 / GAUSS_FWHM_OVER_SIGMA
        assert abs(heights12.population_std() - target) / target < 0.1

    def test_positive_heights_enforced(self):
        with pytest.raises(ParameterError):
            nm.element_heights(nm.HeightProfile(0.1, 2.0), 12)

    def test_profile_validation(self):
        with pytest.raises(ParameterError):
            nm.HeightProfile(center=-1.0)
        with pytest.raises(ParameterError):
            nm.HeightProfile(fwhm=-0.1)


class TestSubsetSums:
    def test_zero_photons_point_mass(self, heights12):
        dist = nm.subset_sum_distribution(heights12, 0)
        assert dist.support.tolist() == [0.0]
        assert dist.weights.tolist() == [1.0]

    def test_all_fired_point_mass(self, heights12):
        dist = nm.subset_sum_distribution(heights12, 12)
        assert dist.support.size == 1
        assert abs(dist.support[0] - heights12.total()) < 1e-12

    def test_single_fire_reproduces_element_set(self, heights12):
        dist = nm.subset_sum_distribution(heights12, 1)
        assert np.allclose(np.sort(dist.support), np.sort(heights12.heights))
        assert np.all(dist.weights == 1.0 / 12.0)

    def test_support_size_is_binomial_coefficient(self, heights12):
        for n in (2, 5, 6):
            dist = nm.subset_sum_distribution(heights12, n)
            assert dist.support.size == math.comb(12, n)

    def test_complement_symmetry_exact(self, heights12):
        total = heights12.total()
        for n in (1, 3, 5):
            direct = np.sort(nm.subset_sum_distribution(heights12, n).support)
            mirrored = np.sort(total - nm.subset_sum_distribution(heights12, 12 - n).support)
            assert np.max(np.abs(direct - mirrored)) < 1e-12

    def test_mean_is_n_times_center(self, heights12):
        for n in range(13):
            dist = nm.subset_sum_distribution(heights12, n)
            assert abs(dist.mean() - n * 1.0) < 1e-12

    def test_variance_identity(self, heights12):
        # exact finite-population (without replacement) sum variance
        var_pop = heights12.population_std() ** 2
        for n in range(1, 12):
            dist = nm.subset_sum_distribution(heights12, n)
            expected = n * var_pop * (12 - n) / 11.0
            assert abs(dist.variance() - expected) / expected < 1e-12

    def test_range_validation(self, heights12):
        with pytest.raises(ParameterError):
            nm.subset_sum_distribution(heights12, 13)


class TestExcessNoiseCurve:
    @pytest.fixture(scope="class")
    def curve(self, heights12):
        return nm.excess_noise_curve(heights12)

    def test_zero_at_both_ends(self, curve):
        assert curve.fwhm[0] == 0.0
        assert curve.fwhm[12] == 0.0

    def test_maximum_at_half_filling(self, curve):
        assert int(curve.n[np.argmax(curve.fwhm)]) == 6

    def test_single_fire_width_reproduces_profile(self, curve):
        assert abs(curve.fwhm[1] - 0.1) / 0.1 < 0.1

    def test_matches_sampling_variance_oracle(self, curve, heights12):
        sigma_pop = heights12.population_std()
        for n in range(2, 11):
            oracle = GAUSS_FWHM_OVER_SIGMA * sigma_pop * math.sqrt(n * (12 - n) / 11.0)
            assert abs(curve.fwhm[n] - oracle) / oracle < 0.1

    def test_complement_symmetry_within_fit_tolerance(self, curve):
        for n in range(1, 12):
            a, b = curve.fwhm[n], curve.fwhm[12 - n]
            assert abs(a - b) / a < 0.02

    def test_degenerate_profile_all_zero(self):
        h = nm.element_heights(nm.HeightProfile(1.0, 0.0), 12)
        curve = nm.excess_noise_curve(h)
        assert np.all(curve.fwhm == 0.0)

    def test_csv_columns(self, curve, tmp_path):
        path = tmp_path / "noise.csv"
        curve.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,fwhm"
        assert len(lines) == 14
        assert lines[1] == "0,0.0"
