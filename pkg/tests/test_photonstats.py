import numpy as np
import pytest

from sndsim import photonstats as ps
from sndsim.errors import ParameterError

ETA_GRID = [0.1, 0.3, 0.5, 0.7, 1.0]
MU_GRID = [0.1, 0.5, 1.0, 5.0, 20.0, 50.0]


class TestClickDistribution:
    def test_vacuum_input(self):
        dist = ps.click_distribution(12, 0.5, 0.0)
        assert dist.probs[0] == pytest.approx(1.0, abs=1e-14)
        assert np.all(dist.probs[1:] == 0.0)

    def test_blind_detector(self):
        dist = ps.click_distribution(12, 0.0, 7.0)
        assert dist.probs[0] == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("eta", ETA_GRID)
    @pytest.mark.parametrize("mu", MU_GRID)
    def test_single_element_closed_form(self, eta, mu):
        dist = ps.click_distribution(1, eta, mu)
        assert abs(dist.probs[1] - -np.expm1(-eta * mu)) < 1e-12

    @pytest.mark.parametrize("n", [1, 4, 12])
    def test_normalization(self, n):
        for eta in ETA_GRID:
            for mu in MU_GRID:
                probs = ps.click_distribution(n, eta, mu).probs
                assert abs(probs.sum() - 1.0) < 1e-10
                assert np.all(probs >= 0)

    @pytest.mark.parametrize("n", [1, 4, 12])
    def test_binomial_equals_alternating_sum(self, n):
        for eta in ETA_GRID:
            for mu in MU_GRID:
                a = ps.click_distribution(n, eta, mu).probs
                b = ps.click_distribution_alternating(n, eta, mu)
                assert np.max(np.abs(a - b)) < 1e-9

    def test_verify_mode_runs(self):
        ps.click_distribution(12, 0.5, 4.0, verify=True)

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            ps.click_distribution(0, 0.5, 1.0)
        with pytest.raises(ParameterError):
            ps.click_distribution(12, 1.5, 1.0)
        with pytest.raises(ParameterError):
            ps.click_distribution(12, 0.5, -1.0)


class TestMonteCarlo:
    def test_uniform_matches_closed_form_3sigma(self):
        n, eta, mu, trials = 12, 0.5, 4.0, 1_000_000
        eff = ps.ElementEfficiencies.uniform(n, eta)
        mc = ps.mc_click_distribution(eff, mu, trials, seed=735)
        exact = ps.click_distribution(n, eta, mu).probs
        sigma = np.sqrt(exact * (1 - exact) / trials)
        assert np.all(np.abs(mc.probs - exact) <= 3 * sigma + 1e-12)

    def test_vacuum_all_zero(self):
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        mc = ps.mc_click_distribution(eff, 0.0, 1000, seed=1)
        assert mc.probs[0] == 1.0

    def test_dead_element_cannot_click(self):
        eff = ps.ElementEfficiencies(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        mc = ps.mc_click_distribution(eff, 20.0, 20_000, seed=2)
        assert mc.probs[2] == 0.0

    def test_seeded_determinism(self):
        eff = ps.ElementEfficiencies.uniform(12, 0.4)
        a = ps.mc_click_distribution(eff, 3.0, 50_000, seed=5)
        b = ps.mc_click_distribution(eff, 3.0, 50_000, seed=5)
        assert np.array_equal(a.probs, b.probs)

    def test_chunking_preserves_stream(self):
        eff = ps.ElementEfficiencies.uniform(4, 0.4)
        a = ps.mc_click_distribution(eff, 2.0, 30_000, seed=9, chunk=7_000)
        b = ps.mc_click_distribution(eff, 2.0, 30_000, seed=9, chunk=7_000)
        assert np.array_equal(a.probs, b.probs)

    def test_efficiencies_validation(self):
        with pytest.raises(ParameterError):
            ps.ElementEfficiencies(np.array([0.6, 0.6]), np.array([0.5, 0.5]))
        with pytest.raises(ParameterError):
            ps.ElementEfficiencies(np.array([0.5, 0.5]), np.array([0.5, 1.5]))


class TestFitEfficiency:
    def test_round_trip(self):
        measured = ps.click_distribution(12, 0.3, 5.0).probs
        fit = ps.fit_efficiency(12, 5.0, measured)
        assert abs(fit.eta - 0.300) < 1e-3
        assert not fit.degenerate

    def test_point_mass_at_zero_degenerate(self):
        measured = np.zeros(13)
        measured[0] = 1.0
        fit = ps.fit_efficiency(12, 5.0, measured)
        assert fit.eta == 0.0
        assert fit.degenerate

    def test_tiny_efficiency_recovered(self):
        # eta* can be orders of magnitude below the [0, 1] span
        measured = ps.click_distribution(12, 7.1e-5, 26_000.0).probs
        fit = ps.fit_efficiency(12, 26_000.0, measured)
        assert abs(fit.eta - 7.1e-5) / 7.1e-5 < 1e-3

    def test_distribution_validation(self):
        with pytest.raises(ParameterError):
            ps.fit_efficiency(12, 1.0, np.ones(13))


class TestExpectedClicks:
    def test_vacuum(self):
        assert ps.expected_clicks(12, 0.5, 0.0) == 0.0

    def test_large_array_limit(self):
        val = ps.expected_clicks(1000, 1.0, 1.0)
        assert abs(val - 1.0) / 1.0 < 1e-3

    def test_moment_identity(self):
        dist = ps.click_distribution(12, 0.4, 3.0)
        assert abs(ps.expected_clicks(12, 0.4, 3.0) - dist.mean()) < 1e-10

    def test_monotone_in_eta_and_mu(self):
        etas = np.linspace(0.05, 1.0, 12)
        vals = [ps.expected_clicks(12, e, 4.0) for e in etas]
        assert np.all(np.diff(vals) > 0)
        mus = np.linspace(0.1, 40.0, 12)
        vals = [ps.expected_clicks(12, 0.6, m) for m in mus]
        assert np.all(np.diff(vals) > 0)


class TestCsv:
    def test_columns(self, tmp_path):
        dist = ps.click_distribution(4, 0.5, 1.0)
        path = tmp_path / "dist.csv"
        dist.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,probability"
        assert len(lines) == 6
        n, p = lines[1].split(",")
        assert n == "0" and float(p) == dist.probs[0]
