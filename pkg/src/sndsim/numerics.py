"""Shared numerical kernels.

Fixed-step classical Runge-Kutta integration, bounded Levenberg-Marquardt
least squares, bracketed scalar minimization, first-order recursive filters
(bilinear transform), and seeded random streams.  Everything here is pure
given its inputs and safe to call from concurrent workers.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar as _scipy_minimize_scalar
from scipy.signal import lfilter

from .errors import FitError, IntegrationError, ParameterError

# FWHM of a Gaussian divided by its standard deviation, 2*sqrt(2*ln 2).
GAUSS_FWHM_OVER_SIGMA = 2.3548200450309493


# ---------------------------------------------------------------------------
# ODE integration


@dataclass
class Trajectory:
    """Uniform-grid solution of an initial value problem.

    ``times`` has constant step; ``states[i]`` is the state vector at
    ``times[i]`` (units are the caller's).
    """

    times: np.ndarray
    states: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    t_end: float,
    dt: float,
) -> Trajectory:
    """Integrate y' = rhs(t, y) with the classical 4th-order Runge-Kutta method.

    The grid is uniform with step ``dt``; ``t_end`` is rounded to the nearest
    whole number of steps.  Raises :class:`IntegrationError` if the state
    becomes non-finite, reporting the time of divergence.
    """
    if dt <= 0:
        raise ParameterError("dt must be > 0")
    if t_end <= 0:
        raise ParameterError("t_end must be > 0")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    n_steps = max(1, int(round(t_end / dt)))
    times = np.arange(n_steps + 1) * dt
    states = np.empty((n_steps + 1, y.size))
    states[0] = y
    for m in range(n_steps):
        t = times[m]
        k1 = np.asarray(rhs(t, y))
        k2 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k1))
        k3 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k2))
        k4 = np.asarray(rhs(t + dt, y + dt * k3))
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(times[m + 1])
        states[m + 1] = y
    return Trajectory(times=times, states=states)


# ---------------------------------------------------------------------------
# Least squares


@dataclass
class FitOutcome:
    """Result of a least-squares or scalar fit.

    ``residual_norm`` is the 2-norm of the residual vector evaluated at
    ``params``.  A ``converged=False`` outcome is returned as-is, never
    silently upgraded.
    """

    params: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int


def fit_least_squares(
    residuals: Callable[[np.ndarray], np.ndarray],
    initial: Sequence[float],
    lower: Sequence[float] | None = None,
    upper: Sequence[float] | None = None,
    *,
    x_scale: Sequence[float] | None = None,
    max_iter: int = 200,
    ftol: float = 1e-12,
    gtol: float = 1e-12,
) -> FitOutcome:
    """Minimize ``sum(residuals(p)**2)`` with Levenberg-Marquardt.

    The Jacobian is built by forward differences; bound handling is simple
    projection of each trial step onto ``[lower, upper]``.  Deterministic:
    identical inputs give identical outcomes.  A non-finite residual at a
    trial point raises :class:`FitError` carrying the last valid parameters.
    """
    p = np.asarray(initial, dtype=float).copy()
    n = p.size
    lo = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(p < lo) or np.any(p > hi):
        raise ParameterError("initial point outside bounds")
    scale = np.ones(n) if x_scale is None else np.abs(np.asarray(x_scale, dtype=float))
    scale = np.where(scale > 0, scale, 1.0)

    r = np.atleast_1d(np.asarray(residuals(p), dtype=float))
    if not np.all(np.isfinite(r)):
        raise ParameterError("residuals not finite at the initial point")
    cost = float(r @ r)

    sqrt_eps = np.sqrt(np.finfo(float).eps)

    def jacobian(pv: np.ndarray, rv: np.ndarray) -> np.ndarray:
        jac = np.empty((rv.size, n))
        for j in range(n):
            h = sqrt_eps * max(abs(pv[j]), scale[j])
            pj = pv.copy()
            pj[j] = min(pv[j] + h, hi[j])
            if pj[j] == pv[j]:  # pinned at the upper bound, step down instead
                pj[j] = pv[j] - h
            rj = np.atleast_1d(np.asarray(residuals(pj), dtype=float))
            if not np.all(np.isfinite(rj)):
                raise FitError(pv)
            jac[:, j] = (rj - rv) / (pj[j] - pv[j])
        return jac

    lam = 1e-3
    iterations = 0
    converged = False
    for _ in range(max_iter):
        jac = jacobian(p, r)
        grad = jac.T @ r
        if np.max(np.abs(grad)) < gtol:
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0] = 1.0
        accepted = False
        while lam < 1e14:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = np.clip(p + step, lo, hi)
            rt = np.atleast_1d(np.asarray(residuals(trial), dtype=float))
            if not np.all(np.isfinite(rt)):
                raise FitError(p)
            cost_t = float(rt @ rt)
            if cost_t < cost:
                rel_drop = (cost - cost_t) / max(cost, 1e-300)
                p, r, cost = trial, rt, cost_t
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                iterations += 1
                if rel_drop < ftol:
                    converged = True
                break
            lam *= 4.0
        if not accepted:
            # Damping saturated: no descent direction improves the cost.
            converged = True
            break
        if converged:
            break
    return FitOutcome(
        params=p, residual_norm=float(np.sqrt(cost)), converged=converged, iterations=iterations
    )


def minimize_scalar(
    fun: Callable[[float], float], lo: float, hi: float, *, tol: float = 1e-10
) -> tuple[float, float]:
    """Minimize a scalar function on [lo, hi]; returns (x*, fun(x*))."""
    if not lo < hi:
        raise ParameterError("need lo < hi")
    res = _scipy_minimize_scalar(fun, bounds=(lo, hi), method="bounded", options={"xatol": tol})
    return float(res.x), float(res.fun)


# ---------------------------------------------------------------------------
# First-order recursive filters


@dataclass(frozen=True)
class FilterSpec:
    """A first-order causal filter stage specification."""

    kind: str  # "low_pass" or "band_pass"
    cutoffs: tuple[float, ...]


def low_pass(f_c: float) -> FilterSpec:
    """First-order low-pass with unit DC gain and cutoff ``f_c`` in Hz."""
    return FilterSpec("low_pass", (float(f_c),))


def band_pass(f_lo: float, f_hi: float) -> FilterSpec:
    """First-order band-pass (high-pass at ``f_lo`` into low-pass at ``f_hi``)."""
    return FilterSpec("band_pass", (float(f_lo), float(f_hi)))


def _first_order_coeffs(kind: str, f_c: float, sample_rate: float):
    if not 0 < f_c < sample_rate / 2:
        raise ParameterError(
            f"cutoff {f_c:.6g} Hz must lie in (0, sample_rate/2 = {sample_rate / 2:.6g} Hz)"
        )
    k = np.tan(np.pi * f_c / sample_rate)  # bilinear prewarp
    a1 = (1.0 - k) / (1.0 + k)
    if kind == "lp":
        b = np.array([k / (1.0 + k), k / (1.0 + k)])
    else:  # hp
        b = np.array([1.0 / (1.0 + k), -1.0 / (1.0 + k)])
    a = np.array([1.0, -a1])
    return b, a


def apply_filter(spec: FilterSpec, signal: Sequence[float], sample_rate: float) -> np.ndarray:
    """Run one filter stage over a uniformly sampled trace.

    Low-pass has DC gain 1, band-pass has DC gain 0; output length equals
    input length.  Sections are first order (bilinear transform), applied
    causally with zero initial state.
    """
    x = np.asarray(signal, dtype=float)
    if spec.kind == "low_pass":
        b, a = _first_order_coeffs("lp", spec.cutoffs[0], sample_rate)
        return lfilter(b, a, x)
    if spec.kind == "band_pass":
        f_lo, f_hi = spec.cutoffs
        if f_lo >= f_hi:
            raise ParameterError("band_pass needs f_lo < f_hi")
        bh, ah = _first_order_coeffs("hp", f_lo, sample_rate)
        bl, al = _first_order_coeffs("lp", f_hi, sample_rate)
        return lfilter(bl, al, lfilter(bh, ah, x))
    raise ParameterError(f"unknown filter kind {spec.kind!r}")


def apply_filter_chain(
    specs: Sequence[FilterSpec], signal: Sequence[float], sample_rate: float
) -> np.ndarray:
    """Apply filter stages in order."""
    y = np.asarray(signal, dtype=float)
    for spec in specs:
        y = apply_filter(spec, y, sample_rate)
    return y


# ---------------------------------------------------------------------------
# Random streams


def make_rng(seed: int) -> np.random.Generator:
    """Explicitly seeded PCG64 stream; identical seeds give identical draws."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """n statistically independent child streams derived from one seed."""
    seq = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(n)]
