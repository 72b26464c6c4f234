"""Click statistics of an N-element multiplexed single-photon detector.

A coherent pulse with mean photon number mu_bar illuminates N elements.
Each element clicks (at most once) when it detects at least one photon.
The closed form for the click-count distribution, an independent
inclusion-exclusion form, and a mechanism-level Monte Carlo are all
provided so they can be checked against each other.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import ParameterError, VerificationError


@dataclass
class ClickDistribution:
    """Probability vector P(n) of n distinct clicks, n = 0..N.

    ``eta`` and ``mu_bar`` record the generating parameters; ``eta`` is None
    for empirical distributions from non-uniform Monte Carlo runs.
    """

    n_elements: int
    eta: float | None
    mu_bar: float
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.n_elements + 1,):
            raise ParameterError("probs must have length N + 1")
        if np.any(self.probs < -1e-12):
            raise ParameterError("negative probability")
        total = self.probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise ParameterError(f"probabilities sum to {total!r}, not 1")

    def mean(self) -> float:
        return float(np.arange(self.n_elements + 1) @ self.probs)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("n,probability\n")
            for n, p in enumerate(self.probs):
                fh.write(f"{n},{float(p)!r}\n")


@dataclass
class ElementEfficiencies:
    """Per-element optical routing and detection probabilities.

    ``routing[k]`` is the probability that an incident photon reaches element
    k (the remainder 1 - sum(routing) is lost); ``detection[k]`` is the
    probability that a routed photon is detected there.  ``per_element`` is
    the product, the detection probability per incident photon.
    """

    routing: np.ndarray
    detection: np.ndarray

    def __post_init__(self):
        self.routing = np.asarray(self.routing, dtype=float)
        self.detection = np.asarray(self.detection, dtype=float)
        if self.routing.shape != self.detection.shape or self.routing.ndim != 1:
            raise ParameterError("routing and detection must be equal-length vectors")
        if np.any(self.routing < 0) or np.any(self.routing > 1):
            raise ParameterError("routing entries must be in [0, 1]")
        if self.routing.sum() > 1 + 1e-12:
            raise ParameterError("routing probabilities sum beyond 1")
        if np.any(self.detection < 0) or np.any(self.detection > 1):
            raise ParameterError("detection entries must be in [0, 1]")

    @property
    def n_elements(self) -> int:
        return self.routing.size

    @property
    def per_element(self) -> np.ndarray:
        return self.routing * self.detection

    @classmethod
    def uniform(cls, n_elements: int, eta: float) -> "ElementEfficiencies":
        """Even 1/N routing with identical detection probability eta."""
        return cls(np.full(n_elements, 1.0 / n_elements), np.full(n_elements, float(eta)))


def _validate(n_elements: int, eta: float, mu_bar: float) -> None:
    if n_elements < 1 or int(n_elements) != n_elements:
        raise ParameterError("n_elements must be a positive integer")
    if not 0.0 <= eta <= 1.0:
        raise ParameterError("eta must be in [0, 1]")
    if mu_bar < 0.0:
        raise ParameterError("mu_bar must be >= 0")


def click_distribution(
    n_elements: int, eta: float, mu_bar: float, *, verify: bool = False
) -> ClickDistribution:
    """Click-count distribution for uniform illumination of N elements.

    Poisson light thinned onto N equal elements leaves each element
    clickless with probability q = exp(-eta*mu_bar/N), independently, so the
    click count is binomial: P(n) = C(N,n) (1-q)^n q^(N-n).  With
    ``verify=True`` the independent inclusion-exclusion form is evaluated as
    well and a disagreement beyond 1e-9 raises :class:`VerificationError`.
    """
    _validate(n_elements, eta, mu_bar)
    n_arr = np.arange(n_elements + 1)
    x = eta * mu_bar / n_elements
    p_click = -np.expm1(-x)  # 1 - exp(-x), accurate for small x
    q = np.exp(-x)
    log_comb = np.array([math.lgamma(n_elements + 1) - math.lgamma(k + 1) - math.lgamma(n_elements - k + 1) for k in n_arr])
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.where(p_click > 0, n_arr * np.log(p_click), np.where(n_arr > 0, -np.inf, 0.0))
        log_q = np.where(q > 0, (n_elements - n_arr) * np.log(q), np.where(n_arr < n_elements, -np.inf, 0.0))
    probs = np.exp(log_comb + log_p + log_q)
    probs /= probs.sum()
    if verify:
        alt = click_distribution_alternating(n_elements, eta, mu_bar)
        worst = float(np.max(np.abs(probs - alt)))
        if worst > 1e-9:
            raise VerificationError(
                f"binomial and alternating-sum click distributions differ by {worst:.3e}"
            )
    return ClickDistribution(n_elements, eta, mu_bar, probs)


def click_distribution_alternating(n_elements: int, eta: float, mu_bar: float) -> np.ndarray:
    """Inclusion-exclusion form of the click-count distribution.

    P(n) = C(N,n) * sum_{j=0..n} (-1)^j C(n,j) exp(-eta*mu_bar*(N-n+j)/N).
    The infinite photon-number sum is eliminated analytically; nothing is
    truncated numerically.  Kept as an independent cross-check of
    :func:`click_distribution`.
    """
    _validate(n_elements, eta, mu_bar)
    big_n = n_elements
    probs = np.empty(big_n + 1)
    for n in range(big_n + 1):
        acc = 0.0
        for j in range(n + 1):
            acc += (-1.0) ** j * math.comb(n, j) * math.exp(-eta * mu_bar * (big_n - n + j) / big_n)
        probs[n] = math.comb(big_n, n) * acc
    return probs


def draw_click_matrix(
    rng: np.random.Generator, eff: ElementEfficiencies, mu_bar: float, trials: int
) -> np.ndarray:
    """Boolean (trials, N) matrix of which elements clicked in each trial.

    Mechanism per trial: m ~ Poisson(mu_bar) photons; each photon is routed
    to element k with probability routing[k] (or lost); element k clicks if
    at least one of its routed photons is detected, each independently with
    probability detection[k].
    """
    if mu_bar < 0:
        raise ParameterError("mu_bar must be >= 0")
    n_el = eff.n_elements
    m = rng.poisson(mu_bar, size=trials)
    loss = max(0.0, 1.0 - float(eff.routing.sum()))
    pvals = np.concatenate([eff.routing, [loss]])
    pvals = pvals / pvals.sum()
    routed = rng.multinomial(m, pvals)[:, :n_el]
    # P(click | m_k routed) = 1 - (1 - eta_k)^(m_k)
    with np.errstate(divide="ignore", invalid="ignore"):
        log1m = np.log1p(-eff.detection)  # -inf where eta_k == 1
        p_click = -np.expm1(routed * log1m)
    p_click = np.where(eff.detection >= 1.0, (routed > 0).astype(float), p_click)
    return rng.random(routed.shape) < p_click


def mc_click_distribution(
    eff: ElementEfficiencies,
    mu_bar: float,
    trials: int,
    seed: int,
    *,
    chunk: int = 500_000,
) -> ClickDistribution:
    """Empirical click-count distribution from the trial mechanism.

    Elements may have arbitrary routing weights and detection efficiencies;
    the result converges to :func:`click_distribution` in the uniform case.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    n_el = eff.n_elements
    rng = numerics.make_rng(seed)
    counts = np.zeros(n_el + 1, dtype=np.int64)
    done = 0
    while done < trials:
        block = min(chunk, trials - done)
        clicks = draw_click_matrix(rng, eff, mu_bar, block)
        counts += np.bincount(clicks.sum(axis=1), minlength=n_el + 1)
        done += block
    uniform_eta = None
    if np.ptp(eff.per_element) == 0.0 and np.ptp(eff.routing) == 0.0:
        uniform_eta = float(n_el * eff.per_element[0])
    return ClickDistribution(n_el, uniform_eta, mu_bar, counts / trials)


@dataclass
class EfficiencyFit:
    """Single-parameter efficiency estimate from a measured distribution."""

    eta: float
    residual: float
    degenerate: bool = False


def fit_efficiency(n_elements: int, mu_bar: float, measured) -> EfficiencyFit:
    """Least-squares fit of the single efficiency eta to a measured P(n).

    Minimizes sum_n (P_eta(n) - measured(n))^2 over eta in [0, 1] with a
    bracketed scalar search.  A measured distribution with all mass at zero
    clicks (at positive mu_bar) is degenerate and returns eta = 0, flagged.
    """
    measured = np.asarray(measured, dtype=float)
    if measured.shape != (n_elements + 1,):
        raise ParameterError("measured must be a distribution over 0..N")
    if np.any(measured < -1e-12) or abs(measured.sum() - 1.0) > 1e-6:
        raise ParameterError("measured is not a probability distribution")

    def objective(eta: float) -> float:
        probs = click_distribution(n_elements, eta, mu_bar).probs
        diff = probs - measured
        return float(diff @ diff)

    if mu_bar > 0 and measured[0] >= 1.0 - 1e-12:
        return EfficiencyFit(eta=0.0, residual=float(np.sqrt(objective(0.0))), degenerate=True)
    # The basin can be a sliver of [0, 1] when mu_bar is huge (eta* scales as
    # 1/mu_bar), so bracket it on a log grid before the local refinement.
    grid = np.concatenate([[0.0], np.logspace(-9, 0, 46)])
    values = [objective(g) for g in grid]
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    if lo >= hi:
        return EfficiencyFit(eta=float(grid[best]), residual=float(np.sqrt(values[best])))
    eta, fval = numerics.minimize_scalar(objective, float(lo), float(hi), tol=1e-14)
    if values[best] < fval:
        eta, fval = float(grid[best]), values[best]
    return EfficiencyFit(eta=eta, residual=float(np.sqrt(fval)))


def expected_clicks(n_elements: int, eta: float, mu_bar: float) -> float:
    """Mean click count N*(1 - exp(-eta*mu_bar/N))."""
    _validate(n_elements, eta, mu_bar)
    return float(n_elements * -np.expm1(-eta * mu_bar / n_elements))
