"""Command-line front end.

Binds a JSON run configuration to the simulation and analysis workflows and
writes CSV artifacts (plus optional SVG plots) under an output directory,
together with a manifest recording the resolved config hash and seed.
"""

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, _svg, analysis, circuit, experiment, noisemodel, numerics, photonstats
from .circuit import FiringPattern, SndConfig
from .errors import ConfigError, SndError
from .experiment import BeamProfile, HeightJitter, LaserConfig, ReadoutChain
from .noisemodel import HeightProfile
from .photonstats import ElementEfficiencies

_DETECTOR_KEYS = {
    "n_elements": "n_elements",
    "r_parallel_ohm": "r_parallel",
    "r_load_ohm": "r_load",
    "i_bias_a": "i_bias",
    "i_critical_a": "i_critical",
    "l_element_h": "l_element",
    "r_hotspot_ohm": "r_hotspot",
    "i_retrap_fraction": "i_retrap_fraction",
    "r_wire_normal_ohm": "r_wire_normal",
}

_LASER_KEYS = {
    "wavelength_m": "wavelength",
    "pulse_width_s": "pulse_width",
    "rep_rate_hz": "rep_rate",
    "power_w": "power",
}

_READOUT_KEYS = {
    "gain_db": "gain_db",
    "noise_rms_v": "noise_rms",
    "sample_rate_hz": "sample_rate",
    "jitter_fwhm_s": "jitter_fwhm",
}


@dataclass
class RunConfig:
    """Fully resolved run description (defaults applied, everything valid)."""

    detector: SndConfig
    laser: LaserConfig
    beam: BeamProfile
    readout: ReadoutChain
    heights_profile: HeightProfile
    efficiencies: ElementEfficiencies
    height_jitter: HeightJitter
    sweep_powers: np.ndarray
    shots_per_power: int
    bins: int
    seed: int

    def resolved_dict(self) -> dict:
        return {
            "detector": {k: getattr(self.detector, v) for k, v in _DETECTOR_KEYS.items()},
            "laser": {k: getattr(self.laser, v) for k, v in _LASER_KEYS.items()},
            "beam": {
                "fwhm_m": self.beam.fwhm,
                "array_side_m": self.beam.array_side,
                "element_geometry_m": [list(g) for g in self.beam.element_geometry],
            },
            "readout": {
                **{k: getattr(self.readout, v) for k, v in _READOUT_KEYS.items()},
                "filters": [
                    {"kind": spec.kind, "cutoffs_hz": list(spec.cutoffs)}
                    for spec in self.readout.filters
                ],
            },
            "heights": {"center": self.heights_profile.center, "fwhm": self.heights_profile.fwhm},
            "efficiencies": {
                "routing": self.efficiencies.routing.tolist(),
                "detection": self.efficiencies.detection.tolist(),
            },
            "height_jitter": {
                "base_sigma": self.height_jitter.base_sigma,
                "per_photon": self.height_jitter.per_photon,
            },
            "sweep": {
                "powers_w": self.sweep_powers.tolist(),
                "shots_per_power": self.shots_per_power,
                "bins": self.bins,
            },
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.resolved_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _parse_filters(specs, violations):
    out = []
    for spec in specs:
        kind = spec.get("kind")
        try:
            if kind == "low_pass":
                out.append(numerics.low_pass(spec["cutoff_hz"]))
            elif kind == "band_pass":
                out.append(numerics.band_pass(spec["low_hz"], spec["high_hz"]))
            else:
                violations.append(f"readout.filters: unknown kind {kind!r}")
        except KeyError as exc:
            violations.append(f"readout.filters: missing key {exc}")
    return tuple(out)


def _build_section(cls, data, key_map, section, violations, **extra):
    kwargs = dict(extra)
    for json_key, field_name in key_map.items():
        if json_key in data:
            kwargs[field_name] = data[json_key]
    unknown = set(data) - set(key_map) - {"filters"}
    for key in sorted(unknown):
        violations.append(f"{section}: unknown key {key!r}")
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        violations.extend(f"{section}: {v}" for v in exc.violations)
    except SndError as exc:
        violations.append(f"{section}: {exc}")
    return None


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Omitted sections and fields get the documented defaults.  On failure a
    :class:`ConfigError` is raised listing every violated invariant, and for
    parse errors the offending line.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from exc
    if not isinstance(data, dict):
        raise ConfigError(["config root must be a JSON object"])

    violations: list[str] = []
    detector = _build_section(
        SndConfig, data.get("detector", {}), _DETECTOR_KEYS, "detector", violations
    )
    laser = _build_section(LaserConfig, data.get("laser", {}), _LASER_KEYS, "laser", violations)

    beam_data = data.get("beam", {})
    beam = None
    try:
        beam = BeamProfile.uniform_stripes(
            fwhm=beam_data.get("fwhm_m", 11.8e-6),
            array_side=beam_data.get("array_side_m", 12e-6),
            n_elements=beam_data.get("n_elements", data.get("detector", {}).get("n_elements", 12)),
            fill_factor=beam_data.get("fill_factor", 0.4),
        )
    except SndError as exc:
        violations.append(f"beam: {exc}")

    readout_data = data.get("readout", {})
    filters = _parse_filters(readout_data.get("filters", []), violations)
    readout = _build_section(
        ReadoutChain, readout_data, _READOUT_KEYS, "readout", violations, filters=filters
    )

    heights_data = data.get("heights", {})
    heights_profile = None
    try:
        heights_profile = HeightProfile(
            center=heights_data.get("center", 1.0), fwhm=heights_data.get("fwhm", 0.1)
        )
    except SndError as exc:
        violations.append(f"heights: {exc}")

    jitter_data = data.get("height_jitter", {})
    height_jitter = HeightJitter(
        base_sigma=jitter_data.get("base_sigma", 0.0),
        per_photon=jitter_data.get("per_photon", 0.0),
    )
    if height_jitter.base_sigma < 0 or height_jitter.per_photon < 0:
        violations.append("height_jitter: coefficients must be >= 0")

    efficiencies = None
    if beam is not None and detector is not None:
        eff_data = data.get("efficiencies", {})
        try:
            if "routing" in eff_data or "detection" in eff_data:
                efficiencies = ElementEfficiencies(
                    np.asarray(eff_data["routing"], dtype=float),
                    np.asarray(eff_data["detection"], dtype=float),
                )
            else:
                routing = experiment.element_coupling(beam)
                if "aperture_override" in eff_data:
                    routing = routing * (
                        eff_data["aperture_override"] / experiment.aperture_fraction(beam)
                    )
                intrinsic = eff_data.get("intrinsic", 3.0e-4)
                detection = np.full(detector.n_elements, float(intrinsic))
                efficiencies = ElementEfficiencies(routing, detection)
            if efficiencies.n_elements != detector.n_elements:
                violations.append("efficiencies: length does not match detector.n_elements")
                efficiencies = None
        except (SndError, KeyError, TypeError) as exc:
            violations.append(f"efficiencies: {exc}")

    sweep_data = data.get("sweep", {})
    if "powers_w" in sweep_data:
        powers = np.asarray(sweep_data["powers_w"], dtype=float)
    else:
        powers = np.linspace(
            sweep_data.get("power_min_w", 0.0),
            sweep_data.get("power_max_w", 64e-9),
            sweep_data.get("power_steps", 17),
        )
    if np.any(powers < 0):
        violations.append("sweep: powers must be >= 0")
    shots = int(sweep_data.get("shots_per_power", 20_000))
    if shots < 1:
        violations.append("sweep: shots_per_power must be >= 1")
    bins = int(sweep_data.get("bins", 512))
    if bins < 2:
        violations.append("sweep: bins must be >= 2")
    seed = data.get("seed", 1)
    if int(seed) != seed or seed < 0:
        violations.append("seed: must be a non-negative integer")

    if violations:
        raise ConfigError(violations)
    return RunConfig(
        detector=detector,
        laser=laser,
        beam=beam,
        readout=readout,
        heights_profile=heights_profile,
        efficiencies=efficiencies,
        height_jitter=height_jitter,
        sweep_powers=powers,
        shots_per_power=shots,
        bins=bins,
        seed=int(seed),
    )


def bundled_config_path(name: str = "paper12.json") -> Path:
    """Path of a configuration shipped with the package."""
    return Path(resources.files("sndsim").joinpath("data", name))


# ---------------------------------------------------------------------------
# Command implementations


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, cfg: RunConfig | None, seed) -> None:
    manifest = {
        "command": command,
        "config_hash": cfg.config_hash() if cfg is not None else None,
        "seed": seed,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _load(args) -> RunConfig:
    path = args.config if args.config else bundled_config_path()
    cfg = load_config(path)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "shots", None) is not None:
        cfg = replace(cfg, shots_per_power=args.shots)
    if getattr(args, "rl", None) is not None:
        cfg = replace(cfg, detector=replace(cfg.detector, r_load=args.rl))
    if (
        getattr(args, "power_min", None) is not None
        or getattr(args, "power_max", None) is not None
        or getattr(args, "power_steps", None) is not None
    ):
        lo = args.power_min if args.power_min is not None else float(cfg.sweep_powers.min())
        hi = args.power_max if args.power_max is not None else float(cfg.sweep_powers.max())
        steps = args.power_steps if args.power_steps is not None else cfg.sweep_powers.size
        cfg = replace(cfg, sweep_powers=np.linspace(lo, hi, steps))
    return cfg


def _cmd_transient(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    if args.n == "all":
        fired = list(range(1, cfg.detector.n_elements + 1))
    else:
        fired = [int(args.n)]
    written = []
    for n in fired:
        trace = circuit.simulate_transient(
            cfg.detector, FiringPattern.simultaneous(n), args.t_end, args.dt
        )
        path = out / f"transient_n{n:02d}.csv"
        trace.to_csv(path, stride=args.stride)
        written.append((n, trace))
        print(f"wrote {path}")
    if args.plot:
        series = [
            (tr.times * 1e9, tr.v_out * 1e3, f"n={n}") for n, tr in written[: len(_svg._COLORS)]
        ]
        _svg.line_plot(
            out / "transient_vout.svg", series, title="output pulse",
            xlabel="time (ns)", ylabel="v_out (mV)",
        )
        print(f"wrote {out / 'transient_vout.svg'}")
    _write_manifest(out, "transient", cfg, None)
    return 0


def _cmd_iv(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    i_max = args.imax if args.imax is not None else 1.5 * cfg.detector.i_critical
    sweep = np.linspace(0.0, i_max, args.steps)
    points = circuit.iv_curve(cfg.detector, sweep)
    path = out / "iv.csv"
    with open(path, "w") as fh:
        fh.write("i_a,v_v\n")
        for i_val, v_val in points:
            fh.write(f"{float(i_val)!r},{float(v_val)!r}\n")
    print(f"wrote {path}")
    if args.plot:
        _svg.line_plot(
            out / "iv.svg",
            [(points[:, 0] * 1e6, points[:, 1] * 1e3, "")],
            title="IV curve", xlabel="I (uA)", ylabel="V (mV)",
        )
        print(f"wrote {out / 'iv.svg'}")
    _write_manifest(out, "iv", cfg, None)
    return 0


def _cmd_stats(args) -> int:
    out = _prepare_out(args)
    dist = photonstats.click_distribution(args.n, args.eta, args.mu, verify=True)
    path = out / "click_distribution.csv"
    dist.to_csv(path)
    print(f"wrote {path}")
    if args.trials:
        eff = ElementEfficiencies.uniform(args.n, args.eta)
        mc = photonstats.mc_click_distribution(eff, args.mu, args.trials, args.seed or 1)
        mc_path = out / "click_distribution_mc.csv"
        mc.to_csv(mc_path)
        print(f"wrote {mc_path}")
    if args.plot:
        ns = np.arange(args.n + 1)
        _svg.line_plot(
            out / "click_distribution.svg",
            [(ns, dist.probs, "closed form")],
            title=f"P(n) for N={args.n}, eta={args.eta}, mu={args.mu}",
            xlabel="n", ylabel="probability",
        )
        print(f"wrote {out / 'click_distribution.svg'}")
    _write_manifest(out, "stats", None, args.seed)
    return 0


def _cmd_noise(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    heights = noisemodel.element_heights(cfg.heights_profile, cfg.detector.n_elements)
    curve = noisemodel.excess_noise_curve(heights)
    path = out / "excess_noise.csv"
    curve.to_csv(path)
    print(f"wrote {path}")
    if args.plot:
        _svg.line_plot(
            out / "excess_noise.svg",
            [(curve.n, curve.fwhm, "")],
            title="excess noise vs n", xlabel="n", ylabel="FWHM",
        )
        print(f"wrote {out / 'excess_noise.svg'}")
    _write_manifest(out, "noise", cfg, None)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    heights = noisemodel.element_heights(cfg.heights_profile, cfg.detector.n_elements)
    result = experiment.run_power_sweep(
        cfg.sweep_powers,
        cfg.shots_per_power,
        cfg.detector,
        cfg.efficiencies,
        cfg.laser,
        cfg.readout,
        heights,
        cfg.seed,
        height_jitter=cfg.height_jitter,
        bins=cfg.bins,
    )
    path = out / "sweep.csv"
    result.to_csv(path)
    print(f"wrote {path}")
    if args.plot:
        _svg.heatmap(
            out / "sweep.svg", result.counts.tolist(),
            title="pulse-height histograms", xlabel="height bin", ylabel="power index",
        )
        print(f"wrote {out / 'sweep.svg'}")
    _write_manifest(out, "sweep", cfg, cfg.seed)
    return 0


def _analyze_fits(cfg: RunConfig, sweep: experiment.PowerSweepResult):
    max_peaks = cfg.detector.n_elements + 1
    return [
        analysis.fit_gaussian_mixture(sweep.bin_centers, sweep.counts[i], max_peaks)
        for i in range(sweep.powers.size)
    ]


def _cmd_analyze(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    sweep = experiment.PowerSweepResult.from_csv(args.sweep)
    fits = _analyze_fits(cfg, sweep)

    peaks_path = out / "peaks.csv"
    with open(peaks_path, "w") as fh:
        fh.write("power_w,n,amplitude,center_v,fwhm_v\n")
        for power, fit in zip(sweep.powers, fits):
            for label, (amp, center, fwhm) in zip(fit.n_labels, fit.peaks):
                fh.write(f"{float(power)!r},{label},{float(amp)!r},{float(center)!r},{float(fwhm)!r}\n")
    print(f"wrote {peaks_path}")

    report_path = out / "report.txt"
    with open(report_path, "w") as fh:
        for power, fit in zip(sweep.powers, fits):
            fh.write(f"power = {power:.6g} W\n{fit.report()}\n\n")
    print(f"wrote {report_path}")

    probs_path = out / "probabilities.csv"
    with open(probs_path, "w") as fh:
        fh.write("power_w,n,probability\n")
        for power, fit in zip(sweep.powers, fits):
            probs = analysis.peak_probabilities(fit)
            for n, p in enumerate(probs):
                fh.write(f"{float(power)!r},{n},{float(p)!r}\n")
    print(f"wrote {probs_path}")

    n_el = cfg.detector.n_elements
    eta_path = out / "eta.csv"
    eta_rows = []
    with open(eta_path, "w") as fh:
        fh.write("power_w,eta,residual,degenerate\n")
        for power, fit in zip(sweep.powers, fits):
            mu = experiment.photons_per_pulse(replace(cfg.laser, power=float(power)))
            if mu <= 0:
                continue
            probs = analysis.peak_probabilities(fit)
            padded = np.zeros(n_el + 1)
            padded[: min(probs.size, n_el + 1)] = probs[: n_el + 1]
            padded /= padded.sum()
            eff_fit = photonstats.fit_efficiency(n_el, mu, padded)
            eta_rows.append((power, eff_fit.eta))
            fh.write(f"{float(power)!r},{eff_fit.eta!r},{eff_fit.residual!r},{int(eff_fit.degenerate)}\n")
    print(f"wrote {eta_path}")

    table = analysis.noise_curves(fits, sweep.powers)
    vn_path = out / "vn.csv"
    table.to_csv(vn_path)
    print(f"wrote {vn_path}")

    centers = analysis.level_centers(fits)
    lin_points = [(n, c) for n, c in sorted(centers.items()) if n >= 1 and c > 0]
    lin_path = out / "linearity.csv"
    with open(lin_path, "w") as fh:
        fh.write("a,alpha,r_squared\n")
        if len(lin_points) >= 2:
            law = analysis.fit_power_law(lin_points)
            fh.write(f"{law.a!r},{law.alpha!r},{law.r_squared!r}\n")
    print(f"wrote {lin_path}")

    # DQE per power: counts above the 0/1 threshold over incident photons
    dqe_path = out / "dqe.csv"
    with open(dqe_path, "w") as fh:
        fh.write("power_w,dqe\n")
        if 0 in centers and 1 in centers:
            threshold = 0.5 * (centers[0] + centers[1])
            mask = sweep.bin_centers > threshold
            aperture = experiment.aperture_fraction(cfg.beam)
            for i, power in enumerate(sweep.powers):
                if power <= 0:
                    continue
                rate = (
                    cfg.laser.rep_rate
                    * sweep.counts[i, mask].sum()
                    / sweep.shots_per_power
                )
                mu = experiment.photons_per_pulse(replace(cfg.laser, power=float(power)))
                incident = mu * cfg.laser.rep_rate * aperture
                fh.write(f"{float(power)!r},{analysis.dqe(rate, incident).value!r}\n")
    print(f"wrote {dqe_path}")

    if args.plot and eta_rows:
        _svg.line_plot(
            out / "eta.svg",
            [([p for p, _ in eta_rows], [e for _, e in eta_rows], "")],
            title="fitted efficiency vs power", xlabel="power (W)", ylabel="eta",
        )
        print(f"wrote {out / 'eta.svg'}")
    _write_manifest(out, "analyze", cfg, None)
    return 0


def _cmd_count_rate(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    sweep = experiment.PowerSweepResult.from_csv(args.sweep)
    fits = _analyze_fits(cfg, sweep)
    curves = analysis.count_rate_analysis(sweep, fits, cfg.laser.rep_rate, dcr=args.dcr)
    cr_path = out / "countrate.csv"
    with open(cr_path, "w") as fh:
        fh.write("n,power_w,rate_hz\n")
        for curve in curves:
            for power, rate in zip(curve.powers, curve.rates):
                fh.write(f"{curve.threshold_label},{float(power)!r},{float(rate)!r}\n")
    print(f"wrote {cr_path}")
    slopes_path = out / "slopes.csv"
    with open(slopes_path, "w") as fh:
        fh.write("n,low_power_slope\n")
        for curve in curves:
            fh.write(f"{curve.threshold_label},{curve.low_power_slope!r}\n")
    print(f"wrote {slopes_path}")
    if args.plot:
        series = [
            (curve.powers, curve.rates, f"n>={curve.threshold_label}") for curve in curves
        ]
        _svg.line_plot(
            out / "countrate.svg", series, title="count rate vs power",
            xlabel="log10 power (W)", ylabel="log10 rate (Hz)", logx=True, logy=True,
        )
        print(f"wrote {out / 'countrate.svg'}")
    _write_manifest(out, "count-rate", cfg, None)
    return 0


def _cmd_calibrate(args) -> int:
    cfg = _load(args)
    out = _prepare_out(args)
    l0 = circuit.calibrate_inductance(cfg.detector, args.target_fall)
    detector = replace(cfg.detector, l_element=l0)
    trace = circuit.simulate_transient(
        detector, FiringPattern.simultaneous(detector.n_elements)
    )
    achieved = trace.fall_time()
    result = {
        "l_element_h": l0,
        "target_fall_s": args.target_fall,
        "achieved_fall_s": achieved,
    }
    path = out / "calibration.json"
    path.write_text(json.dumps(result, indent=2) + "\n")
    print(f"l_element = {l0:.6e} H (fall time {achieved * 1e9:.3f} ns)")
    print(f"wrote {path}")
    _write_manifest(out, "calibrate", cfg, None)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snd",
        description="Series nanowire detector simulator and analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"sndsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, out=True, seed=False, plot=True):
        if config:
            p.add_argument("--config", help="JSON run configuration (default: bundled paper12)")
        if out:
            p.add_argument("--out", default="snd_out", help="output directory")
        if seed:
            p.add_argument("--seed", type=int, help="override the config seed")
        if plot:
            p.add_argument("--plot", action="store_true", help="also write SVG plots")

    p = sub.add_parser("transient", help="time traces of firing events")
    common(p)
    p.add_argument("--n", default="all", help="fired element count, or 'all'")
    p.add_argument("--rl", type=float, help="override load resistance (ohms)")
    p.add_argument("--t-end", type=float, default=100e-9)
    p.add_argument("--dt", type=float, default=1e-12)
    p.add_argument("--stride", type=int, default=10, help="CSV row decimation")
    p.set_defaults(func=_cmd_transient)

    p = sub.add_parser("iv", help="DC current-voltage curve")
    common(p)
    p.add_argument("--imax", type=float, help="sweep maximum (A)")
    p.add_argument("--steps", type=int, default=301)
    p.set_defaults(func=_cmd_iv)

    p = sub.add_parser("stats", help="click statistics table")
    common(p, config=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--trials", type=int, help="add a Monte Carlo column with this many trials")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("noise", help="combinatorial excess-noise curve")
    common(p)
    p.set_defaults(func=_cmd_noise)

    p = sub.add_parser("sweep", help="simulated power sweep histograms")
    common(p, seed=True)
    p.add_argument("--shots", type=int, help="override shots per power")
    p.add_argument("--power-min", type=float)
    p.add_argument("--power-max", type=float)
    p.add_argument("--power-steps", type=int)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("analyze", help="mixture fits, P(n), eta, V_N, linearity, DQE")
    common(p)
    p.add_argument("--sweep", required=True, help="sweep.csv produced by the sweep command")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("count-rate", help="count rate vs power for each threshold")
    common(p)
    p.add_argument("--sweep", required=True, help="sweep.csv produced by the sweep command")
    p.add_argument("--dcr", type=float, default=0.0, help="dark count rate to subtract (Hz)")
    p.set_defaults(func=_cmd_count_rate)

    p = sub.add_parser("calibrate", help="fit element inductance to a pulse fall time")
    common(p, plot=False)
    p.add_argument("--target-fall", type=float, default=11.3e-9, help="1/e fall time (s)")
    p.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for violation in exc.violations:
            print(f"  - {violation}", file=sys.stderr)
        return 1
    except SndError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
