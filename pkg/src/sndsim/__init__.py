"""Simulator and analysis toolkit for series-nanowire photon-number-resolving detectors.

Modules
-------
numerics     fixed-step RK4, Levenberg-Marquardt, filters, seeded streams
circuit      lumped-element transient model, IV curve, inductance calibration
photonstats  click statistics, Monte Carlo, efficiency fitting
noisemodel   combinatorial excess noise of summed pulse heights
experiment   beam coupling, virtual acquisition chain, power sweeps
analysis     mixture fits, P(n) extraction, linearity, count rates, DQE
cli          the ``snd`` command-line entry point
"""

from . import analysis, circuit, experiment, noisemodel, numerics, photonstats
from .analysis import (
    CountRateCurve,
    DqeResult,
    MixtureFit,
    NoiseTable,
    PowerLawFit,
    count_rate_analysis,
    dqe,
    fit_gaussian_mixture,
    fit_power_law,
    noise_curves,
    peak_probabilities,
)
from .circuit import (
    FiringPattern,
    SndConfig,
    TransientTrace,
    calibrate_inductance,
    iv_curve,
    pulse_heights,
    simulate_transient,
    steady_state,
)
from .errors import (
    CalibrationError,
    ConfigError,
    FitError,
    IntegrationError,
    ParameterError,
    ResolutionError,
    SndError,
    VerificationError,
)
from .experiment import (
    BeamProfile,
    HeightJitter,
    LaserConfig,
    PowerSweepResult,
    PulseTemplate,
    ReadoutChain,
    aperture_fraction,
    build_pulse_template,
    element_coupling,
    photons_per_pulse,
    run_power_sweep,
    simulate_shot,
)
from .noisemodel import (
    ElementHeights,
    HeightDistribution,
    HeightProfile,
    element_heights,
    excess_noise_curve,
    subset_sum_distribution,
)
from .numerics import (
    FilterSpec,
    FitOutcome,
    Trajectory,
    apply_filter,
    band_pass,
    fit_least_squares,
    integrate_ode,
    low_pass,
    make_rng,
    spawn_rngs,
)
from .photonstats import (
    ClickDistribution,
    EfficiencyFit,
    ElementEfficiencies,
    click_distribution,
    click_distribution_alternating,
    expected_clicks,
    fit_efficiency,
    mc_click_distribution,
)

__version__ = "0.1.0"
