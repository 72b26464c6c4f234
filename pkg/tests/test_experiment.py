import numpy as np
import pytest
from scipy import integrate

from sndsim import circuit, experiment as ex, noisemodel as nm, numerics, photonstats as ps
from sndsim.errors import ParameterError
from sndsim.numerics import GAUSS_FWHM_OVER_SIGMA


@pytest.fixture(scope="module")
def beam():
    return ex.BeamProfile.uniform_stripes(11.8e-6, 12e-6)


@pytest.fixture(scope="module")
def cfg():
    return circuit.SndConfig()


@pytest.fixture(scope="module")
def chain():
    return ex.ReadoutChain(
        gain_db=51.0,
        noise_rms=2.0e-5,
        filters=(numerics.low_pass(80e6),),
        sample_rate=80e9,
        jitter_fwhm=89e-12,
    )


@pytest.fixture(scope="module")
def template(cfg, chain):
    return ex.build_pulse_template(cfg, chain)


@pytest.fixture(scope="module")
def flat_heights():
    return nm.element_heights(nm.HeightProfile(1.0, 0.0), 12)


class TestApertureFraction:
    def test_point_beam_limit(self):
        beam = ex.BeamProfile.uniform_stripes(1e-12, 12e-6)
        assert ex.aperture_fraction(beam) == pytest.approx(1.0, abs=1e-12)

    def test_tiny_array_limit(self):
        beam = ex.BeamProfile.uniform_stripes(11.8e-6, 1e-12)
        assert ex.aperture_fraction(beam) < 1e-6

    def test_against_quadrature_oracle(self, beam):
        sigma = beam.fwhm / GAUSS_FWHM_OVER_SIGMA
        half = beam.array_side / 2

        def intensity(y, x):
            return np.exp(-(x * x + y * y) / (2 * sigma * sigma)) / (2 * np.pi * sigma * sigma)

        oracle, _ = integrate.dblquad(
            intensity, -half, half, lambda x: -half, lambda x: half, epsabs=1e-12
        )
        assert abs(ex.aperture_fraction(beam) - oracle) < 1e-6


class TestElementCoupling:
    def test_flat_illumination_limit(self):
        wide = ex.BeamProfile.uniform_stripes(1.0, 12e-6)
        q = ex.element_coupling(wide)
        assert np.max(q) / np.min(q) - 1 < 0.01

    def test_mirror_symmetry(self, beam):
        q = ex.element_coupling(beam)
        assert np.max(np.abs(q - q[::-1])) < 1e-9

    def test_center_stripes_dominate(self, beam):
        q = ex.element_coupling(beam)
        inner = q[: 6]
        assert np.all(np.diff(inner) > 0)  # monotone toward the center

    def test_total_below_aperture(self, beam):
        q = ex.element_coupling(beam)
        assert q.sum() < ex.aperture_fraction(beam)

    def test_geometry_validation(self):
        with pytest.raises(ParameterError):
            ex.BeamProfile(11.8e-6, 12e-6, ((-7e-6, -6.5e-6),))
        with pytest.raises(ParameterError):
            ex.BeamProfile(-1.0, 12e-6, ((0.0, 1e-6),))


class TestPhotonsPerPulse:
    def test_zero_power(self):
        assert ex.photons_per_pulse(ex.LaserConfig(power=0.0)) == 0.0

    def test_one_nanowatt_reference(self):
        mu = ex.photons_per_pulse(ex.LaserConfig(power=1e-9))
        assert abs(mu - 6.59e3) / 6.59e3 < 1e-3

    def test_linear_in_power(self):
        mu1 = ex.photons_per_pulse(ex.LaserConfig(power=1e-9))
        mu64 = ex.photons_per_pulse(ex.LaserConfig(power=64e-9))
        assert mu64 == pytest.approx(64 * mu1, rel=1e-12)


class TestReadoutChain:
    def test_nyquist_invariant(self):
        with pytest.raises(ParameterError):
            ex.ReadoutChain(filters=(numerics.low_pass(80e6),), sample_rate=100e6)

    def test_gain_conversion(self):
        assert ex.ReadoutChain(gain_db=20.0).gain == pytest.approx(10.0)

    def test_noise_figure_helper(self):
        v = ex.noise_rms_from_noise_figure(1.1, 500e6)
        assert 1e-5 < v < 5e-5


class TestTemplate:
    def test_superposition_error_small(self, template):
        assert template.superposition_error < 0.02

    def test_peak_reduced_by_low_pass(self, template):
        assert 0 < template.peak_value < template.raw_peak

    def test_noise_scale_below_unity_with_low_pass(self, template):
        assert 0 < template.noise_scale < 1.0


class TestSimulateShot:
    def test_vacuum_silent(self, cfg, template, flat_heights):
        chain0 = ex.ReadoutChain(
            gain_db=51.0, noise_rms=0.0, filters=(), sample_rate=80e9, jitter_fwhm=0.0
        )
        tpl = ex.build_pulse_template(cfg, chain0, check_superposition=False)
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        sample, fired = ex.simulate_shot(
            cfg, eff, 0.0, chain0, flat_heights, seed=3, template=tpl
        )
        assert sample == 0.0
        assert fired == 0

    def test_discrete_level_structure(self, cfg, flat_heights):
        chain0 = ex.ReadoutChain(
            gain_db=51.0, noise_rms=0.0, filters=(), sample_rate=80e9, jitter_fwhm=0.0
        )
        tpl = ex.build_pulse_template(cfg, chain0, check_superposition=False)
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        samples = {
            ex.simulate_shot(cfg, eff, 8.0, chain0, flat_heights, seed=s, template=tpl)[0]
            for s in range(400)
        }
        assert len(samples) <= 13

    def test_fired_marginal_matches_click_statistics(self, cfg, chain, template, flat_heights):
        # true fired counts over many shots against the exact click law
        eta, mu, shots = 0.5, 4.0, 100_000
        eff = ps.ElementEfficiencies.uniform(12, eta)
        sweep = ex.run_power_sweep(
            np.array([mu / eta / ex.photons_per_pulse(ex.LaserConfig(power=1.0))]),
            shots, cfg, eff, ex.LaserConfig(), chain, flat_heights, seed=8, template=template,
        )
        empirical = sweep.fired_counts[0] / shots
        exact = ps.click_distribution(12, eta, mu).probs
        sigma = np.sqrt(exact * (1 - exact) / shots)
        assert np.all(np.abs(empirical - exact) <= 3 * sigma + 1e-12)

    def test_mismatched_sizes_rejected(self, cfg, chain, flat_heights):
        eff = ps.ElementEfficiencies.uniform(4, 0.5)
        with pytest.raises(ParameterError):
            ex.simulate_shot(cfg, eff, 1.0, chain, flat_heights, seed=1)


class TestPowerSweep:
    def test_determinism(self, cfg, chain, template, flat_heights):
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        powers = np.array([0.0, 1e-9, 2e-9])
        kwargs = dict(template=template)
        a = ex.run_power_sweep(
            powers, 2000, cfg, eff, ex.LaserConfig(), chain, flat_heights, seed=7, **kwargs
        )
        b = ex.run_power_sweep(
            powers, 2000, cfg, eff, ex.LaserConfig(), chain, flat_heights, seed=7, **kwargs
        )
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.fired_counts, b.fired_counts)

    def test_zero_power_zero_noise_mass_in_zero_bin(self, cfg, template, flat_heights):
        chain0 = ex.ReadoutChain(
            gain_db=51.0, noise_rms=0.0, filters=(), sample_rate=80e9, jitter_fwhm=0.0
        )
        tpl = ex.build_pulse_template(cfg, chain0, check_superposition=False)
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        sweep = ex.run_power_sweep(
            np.array([0.0]), 500, cfg, eff, ex.LaserConfig(), chain0, flat_heights,
            seed=4, template=tpl,
        )
        centers = sweep.bin_centers
        zero_bin = int(np.argmax(sweep.counts[0]))
        assert sweep.counts[0, zero_bin] == 500
        assert abs(centers[zero_bin]) <= (centers[1] - centers[0])

    def test_every_shot_counted(self, cfg, chain, template, flat_heights):
        eff = ps.ElementEfficiencies.uniform(12, 0.9)
        sweep = ex.run_power_sweep(
            np.array([0.0, 5e-9]), 1500, cfg, eff, ex.LaserConfig(), chain, flat_heights,
            seed=11, template=template,
        )
        assert np.all(sweep.counts.sum(axis=1) == 1500)

    def test_low_pass_reduces_noise_variance(self, cfg, flat_heights):
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        results = []
        for filters in ((), (numerics.low_pass(80e6),)):
            chain_f = ex.ReadoutChain(
                gain_db=51.0, noise_rms=2e-5, filters=filters, sample_rate=80e9, jitter_fwhm=0.0
            )
            tpl = ex.build_pulse_template(cfg, chain_f, check_superposition=False)
            samples, _ = ex._run_shots(
                numerics.make_rng(13), tpl, eff, 0.0, chain_f, flat_heights,
                ex.HeightJitter(), 4000,
            )
            results.append(np.var(samples))
        assert results[1] < results[0]

    def test_csv_round_trip(self, cfg, chain, template, flat_heights, tmp_path):
        eff = ps.ElementEfficiencies.uniform(12, 0.5)
        sweep = ex.run_power_sweep(
            np.array([0.0, 3e-9]), 800, cfg, eff, ex.LaserConfig(), chain, flat_heights,
            seed=21, template=template, bins=64,
        )
        path = tmp_path / "sweep.csv"
        sweep.to_csv(path)
        loaded = ex.PowerSweepResult.from_csv(path)
        assert np.array_equal(loaded.counts, sweep.counts)
        assert np.array_equal(loaded.powers, sweep.powers)
        assert np.allclose(loaded.bin_centers, sweep.bin_centers, rtol=0, atol=1e-18)
        assert loaded.shots_per_power == sweep.shots_per_power
