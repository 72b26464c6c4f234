"""Combinatorial excess noise of summed detector pulse heights.

Each of the N elements produces a slightly different single-fire pulse
height.  An n-element event sums n of those heights, so the n-event height
distribution is the distribution of n-subset sums; its width is the excess
noise of that output level.  The element heights are a deterministic
quantile discretization of a Gaussian profile, which makes the complement
symmetry between n and N-n events exact.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import norm

from . import numerics
from .errors import ParameterError
from .numerics import GAUSS_FWHM_OVER_SIGMA


@dataclass(frozen=True)
class HeightProfile:
    """Gaussian profile (center, fwhm) of the per-element height spread."""

    center: float = 1.0
    fwhm: float = 0.1

    def __post_init__(self):
        if self.center <= 0:
            raise ParameterError("center must be > 0")
        if self.fwhm < 0:
            raise ParameterError("fwhm must be >= 0")


@dataclass
class ElementHeights:
    """Deterministic per-element single-fire pulse heights (normalized)."""

    heights: np.ndarray
    profile: HeightProfile

    @property
    def n_elements(self) -> int:
        return self.heights.size

    def population_std(self) -> float:
        return float(np.std(self.heights))

    def total(self) -> float:
        return float(math.fsum(self.heights))


def element_heights(profile: HeightProfile, n_elements: int) -> ElementHeights:
    """Assign heights at the Gaussian quantiles (k + 0.5)/N, k = 0..N-1.

    The assignment is symmetric about the profile center, so the sample mean
    equals the center exactly and height_k + height_{N-1-k} = 2*center.
    """
    if n_elements < 1:
        raise ParameterError("n_elements must be >= 1")
    if profile.fwhm == 0:
        h = np.full(n_elements, profile.center)
    else:
        sigma = profile.fwhm / GAUSS_FWHM_OVER_SIGMA
        quantiles = (np.arange(n_elements) + 0.5) / n_elements
        h = profile.center + sigma * norm.ppf(quantiles)
    if np.any(h <= 0):
        raise ParameterError("profile produces non-positive heights")
    return ElementHeights(heights=h, profile=profile)


@dataclass
class HeightDistribution:
    """Distribution of summed heights for n-element events.

    ``support`` lists the C(N, n) subset sums (one per subset, duplicates
    kept) with uniform ``weights``; ``gauss_fit`` is the (center, fwhm) of a
    fitted Gaussian once :func:`excess_noise_curve` has processed it.
    """

    n: int
    support: np.ndarray
    weights: np.ndarray
    gauss_fit: tuple[float, float] | None = None

    def mean(self) -> float:
        return float(math.fsum(w * s for w, s in zip(self.weights, self.support)))

    def variance(self) -> float:
        mu = self.mean()
        return float(math.fsum(w * (s - mu) ** 2 for w, s in zip(self.weights, self.support)))


def subset_sum_distribution(heights: ElementHeights, n: int) -> HeightDistribution:
    """Exact n-subset-sum distribution with uniform subset weighting."""
    big_n = heights.n_elements
    if not 0 <= n <= big_n:
        raise ParameterError("need 0 <= n <= N")
    if n == 0:
        return HeightDistribution(0, np.zeros(1), np.ones(1))
    sums = np.fromiter(
        (math.fsum(heights.heights[list(c)]) for c in combinations(range(big_n), n)),
        dtype=float,
        count=math.comb(big_n, n),
    )
    weights = np.full(sums.size, 1.0 / sums.size)
    return HeightDistribution(n, sums, weights)


def _fit_gaussian_width(dist: HeightDistribution, bins: int = 64) -> tuple[float, bool]:
    """Histogram the distribution and fit one Gaussian; returns (fwhm, fitted).

    Binning: ``bins`` uniform bins over [min - 2*sigma, max + 2*sigma].  On
    fit failure falls back to the moment width 2.3548 * weighted std.
    """
    sigma = math.sqrt(dist.variance())
    lo = dist.support.min() - 2.0 * sigma
    hi = dist.support.max() + 2.0 * sigma
    counts, edges = np.histogram(dist.support, bins=bins, range=(lo, hi), weights=dist.weights)
    centers = 0.5 * (edges[:-1] + edges[1:])
    mu = dist.mean()
    amp0 = float(counts.max())

    def residuals(p):
        a, c, s = p
        return a * np.exp(-0.5 * ((centers - c) / s) ** 2) - counts

    width = hi - lo
    out = numerics.fit_least_squares(
        residuals,
        initial=[amp0, mu, sigma],
        lower=[0.0, lo, width / bins / 10.0],
        upper=[10.0 * max(amp0, 1e-12), hi, width],
        x_scale=[max(amp0, 1e-12), max(abs(mu), sigma), sigma],
    )
    if not out.converged:
        return GAUSS_FWHM_OVER_SIGMA * sigma, False
    return GAUSS_FWHM_OVER_SIGMA * float(out.params[2]), True


@dataclass
class ExcessNoiseCurve:
    """Fitted level width vs number of fired elements."""

    n: np.ndarray
    fwhm: np.ndarray
    fitted: np.ndarray  # False where the moment fallback was used

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("n,fwhm\n")
            for n_i, f_i in zip(self.n, self.fwhm):
                fh.write(f"{int(n_i)},{float(f_i)!r}\n")


def excess_noise_curve(heights: ElementHeights, *, bins: int = 64) -> ExcessNoiseCurve:
    """Gaussian-fit FWHM of the n-event height distribution for n = 0..N.

    Point-mass distributions (n = 0, n = N, or a zero-width profile) get
    width 0 without fitting.
    """
    big_n = heights.n_elements
    ns = np.arange(big_n + 1)
    fwhm = np.zeros(big_n + 1)
    fitted = np.ones(big_n + 1, dtype=bool)
    for n in ns:
        dist = subset_sum_distribution(heights, int(n))
        if np.ptp(dist.support) < 1e-15 * max(1.0, abs(float(dist.support[0]))):
            fwhm[n] = 0.0
            continue
        fwhm[n], fitted[n] = _fit_gaussian_width(dist, bins=bins)
    return ExcessNoiseCurve(n=ns, fwhm=fwhm, fitted=fitted)
