"""Analysis pipeline for pulse-height histograms.

Gaussian-mixture fitting of the output levels, extraction of click
probabilities from peak areas, level-height linearity fits, count-rate
curves against trigger thresholds, detection-efficiency bookkeeping, and
noise (level width) tables.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import numerics
from .errors import ParameterError
from .experiment import PowerSweepResult
from .numerics import GAUSS_FWHM_OVER_SIGMA

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Gaussian mixture fitting


@dataclass
class MixtureFit:
    """Sum-of-Gaussians description of one pulse-height histogram.

    ``peaks`` holds (amplitude, center, fwhm) sorted by center;
    ``n_labels[i]`` is the photon-number label of ``peaks[i]``, anchored so
    that a peak at the zero-signal level gets label 0.
    """

    peaks: list[tuple[float, float, float]]
    residual: float
    n_labels: list[int]
    low_confidence: bool = False

    @property
    def centers(self) -> np.ndarray:
        return np.array([p[1] for p in self.peaks])

    @property
    def fwhms(self) -> np.ndarray:
        return np.array([p[2] for p in self.peaks])

    def center_of(self, label: int) -> float:
        for lab, peak in zip(self.n_labels, self.peaks):
            if lab == label:
                return peak[1]
        raise KeyError(label)

    def report(self) -> str:
        lines = ["  n    amplitude        center           fwhm"]
        for lab, (amp, center, fwhm) in zip(self.n_labels, self.peaks):
            lines.append(f"{lab:>3}   {amp:>12.6g}   {center:>12.6g}   {fwhm:>12.6g}")
        lines.append(f"residual norm: {self.residual:.6g}")
        if self.low_confidence:
            lines.append("flag: low confidence (no discernible peak structure)")
        return "\n".join(lines)


def _gauss_sum(x: np.ndarray, params: np.ndarray) -> np.ndarray:
    y = np.zeros_like(x)
    for i in range(0, params.size, 3):
        a, c, s = params[i : i + 3]
        y = y + a * np.exp(-0.5 * ((x - c) / s) ** 2)
    return y


def _joint_fit(x, y, params, n_bins):
    n_peaks = params.size // 3
    lo = np.tile([0.0, -0.05, 0.1 / n_bins], n_peaks)
    hi = np.tile([2.0, 1.05, 1.0], n_peaks)
    scale = np.tile([1.0, 1.0, 0.05], n_peaks)

    def residuals(p):
        return _gauss_sum(x, p) - y

    out = numerics.fit_least_squares(
        residuals, params, lo, hi, x_scale=scale, max_iter=400, ftol=1e-14
    )
    return out.params, out.residual_norm


def _assign_labels(centers: np.ndarray, zero_level: float, span: float, max_peaks: int) -> list[int]:
    if centers.size >= 2:
        spacing = float(np.median(np.diff(centers)))
    else:
        spacing = span / max_peaks
    labels = [max(0, int(round((centers[0] - zero_level) / spacing)))]
    for i in range(1, centers.size):
        gap = int(round((centers[i] - centers[i - 1]) / spacing))
        labels.append(labels[-1] + max(1, gap))
    return labels


def fit_gaussian_mixture(
    bin_centers,
    counts,
    max_peaks: int = 13,
    *,
    zero_level: float = 0.0,
) -> MixtureFit:
    """Fit a histogram with a sum of Gaussian peaks.

    Peaks are added one at a time, seeded from local maxima of the smoothed
    data (then of the smoothed fit residual), jointly refined by least
    squares after each addition, and kept while the residual norm improves
    by more than 5% and the new peak stays separated from its neighbors by
    more than half a local fwhm.  Labels count level spacings from
    ``zero_level``.
    """
    x_raw = np.asarray(bin_centers, dtype=float)
    y_raw = np.asarray(counts, dtype=float)
    if x_raw.size == 0 or x_raw.size != y_raw.size:
        raise ParameterError("histogram must be non-empty with matching lengths")
    if max_peaks < 1:
        raise ParameterError("max_peaks must be >= 1")
    n_bins = x_raw.size
    span = float(x_raw[-1] - x_raw[0]) or 1.0
    y_max = float(y_raw.max())
    if y_max <= 0:
        return MixtureFit(
            peaks=[(0.0, float(x_raw[0]), span / n_bins)],
            residual=0.0,
            n_labels=[0],
            low_confidence=True,
        )
    x = (x_raw - x_raw[0]) / span
    y = y_raw / y_max

    kernel = np.exp(-0.5 * (np.arange(-5, 6) / 1.5) ** 2)
    kernel /= kernel.sum()
    smooth = np.convolve(y, kernel, mode="same")
    cand_idx, _ = find_peaks(smooth, height=1e-3 * smooth.max(), distance=2)
    low_confidence = False
    if cand_idx.size == 0:
        cand_idx = np.array([int(np.argmax(y))])
        low_confidence = True

    def initial_width(idx: int) -> float:
        half = smooth[idx] / 2
        j = idx
        while j + 1 < n_bins and smooth[j + 1] > half:
            j += 1
        k = idx
        while k - 1 >= 0 and smooth[k - 1] > half:
            k -= 1
        fwhm_bins = max(j - k, 1)
        return fwhm_bins / n_bins / GAUSS_FWHM_OVER_SIGMA

    order = list(cand_idx[np.argsort(smooth[cand_idx])[::-1]])
    first = order.pop(0)
    params = np.array([y[first], x[first], initial_width(first)])
    params, res_norm = _joint_fit(x, y, params, n_bins)

    while params.size // 3 < max_peaks:
        residual = y - _gauss_sum(x, params)
        smooth_res = np.convolve(residual, kernel, mode="same")
        centers_now = params[1::3]
        widths_now = params[2::3]
        best = None
        for idx in order:
            sep_ok = True
            for c, s in zip(centers_now, widths_now):
                if abs(x[idx] - c) <= 0.5 * GAUSS_FWHM_OVER_SIGMA * s:
                    sep_ok = False
                    break
            if sep_ok and (best is None or smooth_res[idx] > smooth_res[best]):
                best = idx
        if best is None or smooth_res[best] <= 0:
            break
        order.remove(best)
        trial = np.concatenate([params, [max(residual[best], 1e-3), x[best], initial_width(best)]])
        trial, trial_norm = _joint_fit(x, y, trial, n_bins)
        if trial_norm < 0.95 * res_norm:
            params, res_norm = trial, trial_norm
        else:
            break

    # collapse duplicates: keep the taller of two peaks that converged together
    peaks_n = [
        (params[i], params[i + 1], params[i + 2]) for i in range(0, params.size, 3)
    ]
    peaks_n.sort(key=lambda p: p[1])
    kept: list[tuple[float, float, float]] = []
    for peak in peaks_n:
        if kept and abs(peak[1] - kept[-1][1]) < 0.5 * min(peak[2], kept[-1][2]):
            if peak[0] > kept[-1][0]:
                kept[-1] = peak
            continue
        kept.append(peak)

    peaks = [
        (a * y_max, x_raw[0] + c * span, GAUSS_FWHM_OVER_SIGMA * s * span) for a, c, s in kept
    ]
    centers = np.array([p[1] for p in peaks])
    labels = _assign_labels(centers, zero_level, span, max_peaks)
    return MixtureFit(
        peaks=peaks,
        residual=float(res_norm * y_max),
        n_labels=labels,
        low_confidence=low_confidence,
    )


def peak_probabilities(fit: MixtureFit) -> np.ndarray:
    """Click probabilities from normalized Gaussian peak areas.

    The area of each peak is proportional to amplitude * fwhm; labels with
    no fitted peak get probability 0.
    """
    if not fit.peaks:
        raise ParameterError("fit has no peaks")
    n_max = max(fit.n_labels)
    probs = np.zeros(n_max + 1)
    for label, (amp, _, fwhm) in zip(fit.n_labels, fit.peaks):
        probs[label] += amp * fwhm
    total = probs.sum()
    if total <= 0:
        probs[:] = 0.0
        probs[fit.n_labels[0]] = 1.0
        return probs
    return probs / total


# ---------------------------------------------------------------------------
# Linearity


@dataclass
class PowerLawFit:
    """H = A * n**alpha fit of level height versus photon number."""

    a: float
    alpha: float
    r_squared: float


def fit_power_law(points) -> PowerLawFit:
    """Ordinary least squares on (ln n, ln H)."""
    pts = [(float(n), float(h)) for n, h in points]
    if len(pts) < 2:
        raise ParameterError("need at least 2 points")
    for n, h in pts:
        if n < 1:
            raise ParameterError("photon numbers must be >= 1")
        if h <= 0:
            raise ParameterError("heights must be > 0")
    ln_n = np.log([n for n, _ in pts])
    ln_h = np.log([h for _, h in pts])
    alpha, intercept = np.polyfit(ln_n, ln_h, 1)
    pred = alpha * ln_n + intercept
    ss_res = float(np.sum((ln_h - pred) ** 2))
    ss_tot = float(np.sum((ln_h - ln_h.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(a=float(np.exp(intercept)), alpha=float(alpha), r_squared=r2)


# ---------------------------------------------------------------------------
# Count rates


@dataclass
class CountRateCurve:
    """Count rate above the n-photon trigger threshold versus power."""

    threshold_label: int
    threshold: float
    powers: np.ndarray
    rates: np.ndarray
    low_power_slope: float


def level_centers(fits) -> dict[int, float]:
    """Median fitted center per photon-number label across powers."""
    gathered: dict[int, list[float]] = {}
    for fit in fits:
        for label, (_, center, _) in zip(fit.n_labels, fit.peaks):
            gathered.setdefault(label, []).append(center)
    return {label: float(np.median(vals)) for label, vals in gathered.items()}


def count_rate_analysis(
    sweep: PowerSweepResult,
    fits,
    rep_rate: float,
    *,
    dcr: float = 0.0,
    max_label: int | None = None,
) -> list[CountRateCurve]:
    """Count-rate curves for thresholds between adjacent output levels.

    The threshold for label n sits midway between the (n-1)-th and n-th
    fitted level centers, so the curve counts '>= n photon' events.  The
    low-power slope is fitted on ln(rate) vs ln(power) over the powers whose
    fitted mean click number is below 1.  A constant dark-count rate ``dcr``
    is subtracted from every rate.  Curves with no counts are omitted.
    """
    if len(fits) != sweep.powers.size:
        raise ParameterError("need one mixture fit per sweep power")
    centers = level_centers(fits)
    if max_label is None:
        max_label = max(centers) if centers else 0
    mean_clicks = np.array(
        [float(np.arange(peak_probabilities(f).size) @ peak_probabilities(f)) for f in fits]
    )
    bin_centers = sweep.bin_centers
    curves = []
    for n in range(1, max_label + 1):
        if n - 1 not in centers or n not in centers:
            log.info("skipping threshold %d: missing adjacent level centers", n)
            continue
        threshold = 0.5 * (centers[n - 1] + centers[n])
        mask = bin_centers > threshold
        frac = sweep.counts[:, mask].sum(axis=1) / sweep.shots_per_power
        rates = np.maximum(rep_rate * frac - dcr, 0.0)
        if not np.any(rates > 0):
            log.info("omitting threshold %d: no counts above it at any power", n)
            continue
        sel = (mean_clicks < 1.0) & (rates > 0) & (sweep.powers > 0)
        if sel.sum() >= 2:
            slope = float(np.polyfit(np.log(sweep.powers[sel]), np.log(rates[sel]), 1)[0])
        else:
            slope = float("nan")
        curves.append(
            CountRateCurve(
                threshold_label=n,
                threshold=float(threshold),
                powers=sweep.powers.copy(),
                rates=rates,
                low_power_slope=slope,
            )
        )
    return curves


# ---------------------------------------------------------------------------
# Efficiency bookkeeping


@dataclass
class DqeResult:
    """Counts above the zero level divided by incident photons per second."""

    value: float
    raw_ratio: float
    consistent: bool


def dqe(counts_above_zero_level: float, incident_photon_rate: float) -> DqeResult:
    """Detection efficiency as a counted fraction of incident photons."""
    if incident_photon_rate <= 0:
        raise ParameterError("incident photon rate must be > 0")
    if counts_above_zero_level < 0:
        raise ParameterError("count rate must be >= 0")
    ratio = float(counts_above_zero_level / incident_photon_rate)
    if ratio > 1.0:
        return DqeResult(value=1.0, raw_ratio=ratio, consistent=False)
    return DqeResult(value=ratio, raw_ratio=ratio, consistent=True)


# ---------------------------------------------------------------------------
# Noise tables


@dataclass
class NoiseTable:
    """Fitted level widths V_N arranged by photon number and power."""

    labels: np.ndarray
    powers: np.ndarray
    v_n: np.ndarray  # (n_labels, n_powers), NaN where the peak was not fitted

    def by_power(self, power_index: int) -> np.ndarray:
        return self.v_n[:, power_index]

    def by_label(self, label: int) -> np.ndarray:
        return self.v_n[list(self.labels).index(label), :]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("n,power_w,v_n\n")
            for i, label in enumerate(self.labels):
                for j, power in enumerate(self.powers):
                    fh.write(f"{int(label)},{float(power)!r},{float(self.v_n[i, j])!r}\n")


def noise_curves(fits, powers) -> NoiseTable:
    """Pivot per-power mixture fits into a V_N(n, power) table."""
    powers = np.asarray(powers, dtype=float)
    if len(fits) != powers.size:
        raise ParameterError("need one mixture fit per power")
    all_labels = sorted({label for fit in fits for label in fit.n_labels})
    v_n = np.full((len(all_labels), powers.size), np.nan)
    for j, fit in enumerate(fits):
        for label, (_, _, fwhm) in zip(fit.n_labels, fit.peaks):
            v_n[all_labels.index(label), j] = fwhm
    return NoiseTable(labels=np.asarray(all_labels), powers=powers, v_n=v_n)
