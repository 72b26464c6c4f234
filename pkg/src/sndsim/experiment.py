"""End-to-end virtual measurement chain.

Beam profile -> per-element coupling -> Poisson photons -> element firings
-> circuit pulse -> amplifier noise and filters -> jittered sampling ->
pulse-height histograms over a laser-power sweep.

Per-shot pulses are synthesized from a precomputed single-fire template
scaled by each fired element's height factor instead of re-integrating the
circuit, so sweeps with 10^5-10^6 shots run in seconds.  The superposition
error of that shortcut against the full simulation is checked once per
configuration and recorded on the template.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as _c_light
from scipy.constants import h as _h_planck
from scipy.constants import k as _k_boltzmann
from scipy.special import erf

from . import circuit, numerics, photonstats
from .circuit import FiringPattern, SndConfig
from .errors import ParameterError
from .noisemodel import ElementHeights
from .numerics import GAUSS_FWHM_OVER_SIGMA, FilterSpec
from .photonstats import ElementEfficiencies

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Optics


@dataclass(frozen=True)
class BeamProfile:
    """Centered Gaussian spot over an N-stripe detector array.

    ``element_geometry`` holds the active x-extent (lo, hi) of each stripe;
    the nanowires run along y and cover the full array side.
    """

    fwhm: float
    array_side: float
    element_geometry: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.fwhm <= 0:
            raise ParameterError("beam fwhm must be > 0")
        if self.array_side <= 0:
            raise ParameterError("array_side must be > 0")
        half = self.array_side / 2
        prev_hi = -half
        for lo, hi in self.element_geometry:
            if not (-half <= lo < hi <= half):
                raise ParameterError("stripe extents must be disjoint and inside the array")
            if lo < prev_hi:
                raise ParameterError("stripe extents must be disjoint and ordered")
            prev_hi = hi

    @property
    def n_elements(self) -> int:
        return len(self.element_geometry)

    @classmethod
    def uniform_stripes(
        cls, fwhm: float, array_side: float, n_elements: int = 12, fill_factor: float = 0.4
    ) -> "BeamProfile":
        """N equal stripes with a centered active fraction ``fill_factor``."""
        if not 0 < fill_factor <= 1:
            raise ParameterError("fill_factor must be in (0, 1]")
        width = array_side / n_elements
        geometry = []
        for k in range(n_elements):
            center = -array_side / 2 + (k + 0.5) * width
            geometry.append((center - fill_factor * width / 2, center + fill_factor * width / 2))
        return cls(fwhm, array_side, tuple(geometry))


def aperture_fraction(beam: BeamProfile) -> float:
    """Fraction of the beam power inside the array square.

    Separable product of per-axis error-function integrals of the centered
    Gaussian intensity profile.
    """
    sigma = beam.fwhm / GAUSS_FWHM_OVER_SIGMA
    axis = erf(beam.array_side / (2.0 * math.sqrt(2.0) * sigma))
    return float(axis * axis)


def element_coupling(beam: BeamProfile) -> np.ndarray:
    """Per-element routing weights q_k from the beam overlap with each stripe."""
    sigma = beam.fwhm / GAUSS_FWHM_OVER_SIGMA
    sq2 = math.sqrt(2.0) * sigma
    y_frac = erf(beam.array_side / (2.0 * sq2))
    q = np.empty(beam.n_elements)
    for k, (lo, hi) in enumerate(beam.element_geometry):
        q[k] = 0.5 * (erf(hi / sq2) - erf(lo / sq2)) * y_frac
    return q


# ---------------------------------------------------------------------------
# Source and readout


@dataclass(frozen=True)
class LaserConfig:
    """Pulsed laser parameters; power may be zero (blocked beam)."""

    wavelength: float = 1.31e-6  # m
    pulse_width: float = 100e-12  # s
    rep_rate: float = 1e6  # Hz
    power: float = 0.0  # W, average

    def __post_init__(self):
        if self.wavelength <= 0 or self.pulse_width <= 0 or self.rep_rate <= 0:
            raise ParameterError("wavelength, pulse_width and rep_rate must be > 0")
        if self.power < 0:
            raise ParameterError("power must be >= 0")


def photons_per_pulse(laser: LaserConfig) -> float:
    """Mean photons per pulse at the fiber tip: (P / f_rep) / (h c / lambda)."""
    energy_per_pulse = laser.power / laser.rep_rate
    photon_energy = _h_planck * _c_light / laser.wavelength
    return energy_per_pulse / photon_energy


@dataclass(frozen=True)
class ReadoutChain:
    """Amplifier, filters and sampler applied to the detector output."""

    gain_db: float = 51.0
    noise_rms: float = 0.0          # V, white per-sample noise at the input
    filters: tuple[FilterSpec, ...] = ()
    sample_rate: float = 80e9       # Hz
    jitter_fwhm: float = 0.0        # s, Gaussian timing jitter of the sampler

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ParameterError("sample_rate must be > 0")
        if self.noise_rms < 0 or self.jitter_fwhm < 0:
            raise ParameterError("noise_rms and jitter_fwhm must be >= 0")
        for spec in self.filters:
            for f_c in spec.cutoffs:
                if self.sample_rate <= 2 * f_c:
                    raise ParameterError(
                        f"sample_rate must exceed twice the highest cutoff ({f_c:.3g} Hz)"
                    )

    @property
    def gain(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)


def noise_rms_from_noise_figure(
    nf_db: float, bandwidth: float, temperature: float = 290.0, impedance: float = 50.0
) -> float:
    """Input-referred v_rms = sqrt(4 k T R B F), source thermal floor included."""
    factor = 10.0 ** (nf_db / 10.0)
    return math.sqrt(4.0 * _k_boltzmann * temperature * impedance * bandwidth * factor)


@dataclass(frozen=True)
class HeightJitter:
    """Per-firing height-factor spread: sigma = base_sigma + per_photon * mu_bar.

    Models wire inhomogeneity: at higher power, wider wire sections with
    lower normal resistance fire too, broadening each element's pulse
    height.  Zero by default.
    """

    base_sigma: float = 0.0
    per_photon: float = 0.0

    def sigma(self, mu_bar: float) -> float:
        return self.base_sigma + self.per_photon * mu_bar


# ---------------------------------------------------------------------------
# Pulse template


@dataclass
class PulseTemplate:
    """Filtered single-fire output pulse, before amplifier gain.

    ``values`` is the trace for a unit height factor; per-shot synthesis
    scales it by the summed height factors of the fired elements.
    ``noise_scale`` converts the per-sample input noise rms into the rms of
    the filtered noise at the sampling instant.
    """

    times: np.ndarray
    values: np.ndarray
    t_peak: float
    peak_value: float
    raw_peak: float
    noise_scale: float
    superposition_error: float


def build_pulse_template(
    cfg: SndConfig,
    chain: ReadoutChain,
    *,
    t_end: float = 100e-9,
    dt: float = 1e-12,
    check_superposition: bool = True,
) -> PulseTemplate:
    """Simulate one single-element firing and prepare the filtered template.

    With ``check_superposition`` the peak heights of full n-element
    simulations are compared against n times the single-fire peak for every
    n; the worst relative error is stored and logged if it exceeds 2%.
    """
    trace = circuit.simulate_transient(cfg, FiringPattern.simultaneous(1), t_end, dt)
    raw_peak = trace.peak_height()
    t_samp = np.arange(0.0, t_end, 1.0 / chain.sample_rate)
    resampled = np.interp(t_samp, trace.times, trace.v_out)
    filtered = numerics.apply_filter_chain(chain.filters, resampled, chain.sample_rate)
    ipk = int(np.argmax(filtered))
    impulse = np.zeros(t_samp.size)
    impulse[0] = 1.0
    g = numerics.apply_filter_chain(chain.filters, impulse, chain.sample_rate)
    noise_scale = float(np.sqrt(np.sum(g * g)))
    sup_err = 0.0
    if check_superposition:
        heights = circuit.pulse_heights(cfg, t_end, dt)
        n = np.arange(1, cfg.n_elements + 1)
        sup_err = float(np.max(np.abs(n * raw_peak - heights) / heights))
        if sup_err > 0.02:
            log.warning("template superposition error %.2f%% exceeds 2%%", 100 * sup_err)
        else:
            log.info("template superposition error %.3f%%", 100 * sup_err)
    return PulseTemplate(
        times=t_samp,
        values=filtered,
        t_peak=float(t_samp[ipk]),
        peak_value=float(filtered[ipk]),
        raw_peak=raw_peak,
        noise_scale=noise_scale,
        superposition_error=sup_err,
    )


# ---------------------------------------------------------------------------
# Shots


def _run_shots(
    rng: np.random.Generator,
    template: PulseTemplate,
    eff: ElementEfficiencies,
    mu_bar: float,
    chain: ReadoutChain,
    heights: ElementHeights,
    height_jitter: HeightJitter,
    trials: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized shot batch; returns (sampled voltages, true fired counts)."""
    clicks = photonstats.draw_click_matrix(rng, eff, mu_bar, trials)
    fired = clicks.sum(axis=1)
    amp = clicks @ heights.heights
    sigma_h = height_jitter.sigma(mu_bar)
    if sigma_h > 0:
        amp = amp + sigma_h * (clicks * rng.standard_normal(clicks.shape)).sum(axis=1)
    if chain.jitter_fwhm > 0:
        t_samp = template.t_peak + (
            chain.jitter_fwhm / GAUSS_FWHM_OVER_SIGMA
        ) * rng.standard_normal(trials)
        level = np.interp(t_samp, template.times, template.values)
    else:
        level = np.full(trials, template.peak_value)
    samples = amp * level
    if chain.noise_rms > 0:
        samples = samples + template.noise_scale * chain.noise_rms * rng.standard_normal(trials)
    return chain.gain * samples, fired


def simulate_shot(
    cfg: SndConfig,
    eff: ElementEfficiencies,
    mu_bar: float,
    chain: ReadoutChain,
    heights: ElementHeights,
    seed: int,
    *,
    template: PulseTemplate | None = None,
    height_jitter: HeightJitter = HeightJitter(),
) -> tuple[float, int]:
    """One acquisition: returns (sampled output voltage, true fired count).

    Pass a prebuilt ``template`` when calling repeatedly; otherwise one is
    built from scratch for this configuration.
    """
    if eff.n_elements != cfg.n_elements or heights.n_elements != cfg.n_elements:
        raise ParameterError("efficiencies, heights and config must agree on N")
    if template is None:
        template = build_pulse_template(cfg, chain, check_superposition=False)
    rng = numerics.make_rng(seed)
    samples, fired = _run_shots(rng, template, eff, mu_bar, chain, heights, height_jitter, 1)
    return float(samples[0]), int(fired[0])


# ---------------------------------------------------------------------------
# Power sweep


@dataclass
class PowerSweepResult:
    """Pulse-height histograms per laser power, on one shared binning."""

    powers: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray        # (n_powers, n_bins) ints
    shots_per_power: int
    seed: int | None
    fired_counts: np.ndarray | None = None  # (n_powers, N+1) true fired histogram

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_csv(self, path) -> None:
        centers = self.bin_centers
        with open(path, "w") as fh:
            fh.write("power_w,bin_center_v,count\n")
            for i, p in enumerate(self.powers):
                for center, count in zip(centers, self.counts[i]):
                    fh.write(f"{float(p)!r},{float(center)!r},{int(count)}\n")

    @classmethod
    def from_csv(cls, path) -> "PowerSweepResult":
        powers: list[float] = []
        rows: list[list[int]] = []
        centers: list[float] = []
        first_power = None
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "power_w,bin_center_v,count":
                raise ParameterError(f"unexpected sweep CSV header: {header!r}")
            for line in fh:
                p_s, c_s, n_s = line.rstrip("\n").split(",")
                p = float(p_s)
                if not powers or p != powers[-1]:
                    powers.append(p)
                    rows.append([])
                    if first_power is None:
                        first_power = p
                if p == first_power:
                    centers.append(float(c_s))
                rows[-1].append(int(n_s))
        centers_arr = np.asarray(centers)
        if centers_arr.size < 2:
            raise ParameterError("sweep CSV must contain at least two bins")
        width = centers_arr[1] - centers_arr[0]
        edges = np.concatenate([centers_arr - width / 2, [centers_arr[-1] + width / 2]])
        counts = np.asarray(rows, dtype=np.int64)
        return cls(
            powers=np.asarray(powers),
            bin_edges=edges,
            counts=counts,
            shots_per_power=int(counts[0].sum()),
            seed=None,
        )


def default_bin_range(
    cfg: SndConfig, chain: ReadoutChain, template: PulseTemplate, heights: ElementHeights
) -> tuple[float, float]:
    """Histogram range covering noise excursions up to the all-fired level."""
    top = chain.gain * template.peak_value * float(heights.heights.sum())
    noise = chain.gain * template.noise_scale * chain.noise_rms
    hi = 1.1 * top + 8.0 * noise
    lo = -0.08 * top - 8.0 * noise
    return lo, hi


def run_power_sweep(
    powers,
    shots_per_power: int,
    cfg: SndConfig,
    eff: ElementEfficiencies,
    laser: LaserConfig,
    chain: ReadoutChain,
    heights: ElementHeights,
    seed: int,
    *,
    height_jitter: HeightJitter = HeightJitter(),
    bins: int = 512,
    bin_range: tuple[float, float] | None = None,
    template: PulseTemplate | None = None,
) -> PowerSweepResult:
    """Acquire pulse-height histograms at each laser power.

    Deterministic for a fixed seed: each power gets an independent child
    stream and shots are reduced in order.
    """
    if shots_per_power < 1:
        raise ParameterError("shots_per_power must be >= 1")
    powers = np.asarray(powers, dtype=float)
    if template is None:
        template = build_pulse_template(cfg, chain)
    if bin_range is None:
        bin_range = default_bin_range(cfg, chain, template, heights)
    edges = np.linspace(bin_range[0], bin_range[1], bins + 1)
    counts = np.zeros((powers.size, bins), dtype=np.int64)
    fired_counts = np.zeros((powers.size, cfg.n_elements + 1), dtype=np.int64)
    rngs = numerics.spawn_rngs(seed, powers.size)
    for i, power in enumerate(powers):
        mu = photons_per_pulse(replace(laser, power=float(power)))
        samples, fired = _run_shots(
            rngs[i], template, eff, mu, chain, heights, height_jitter, shots_per_power
        )
        # clip outliers into the end bins so every shot is counted
        clipped = np.clip(samples, edges[0], np.nextafter(edges[-1], -np.inf))
        counts[i], _ = np.histogram(clipped, bins=edges)
        fired_counts[i] = np.bincount(fired, minlength=cfg.n_elements + 1)
    return PowerSweepResult(
        powers=powers,
        bin_edges=edges,
        counts=counts,
        shots_per_power=shots_per_power,
        seed=seed,
        fired_counts=fired_counts,
    )
