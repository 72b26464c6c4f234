"""Lumped-element electrical model of the series nanowire detector.

N nanowire elements in series, each shunted by a parallel resistor R_p,
biased by an ideal current source I_B and read out across a load R_L.  A
fired element's nanowire switches to a hotspot resistance R_hs and heals
once its current falls below the retrapping level.  Per element k:

    L_0 di_k/dt = R_p (i_chain - i_k) - r_k(t) i_k
    i_chain     = (R_L I_B + R_p sum_k i_k) / (R_L + N R_p)
    v_out       = R_L (I_B - i_chain)

The fast hotspot phase sets the step-size requirement: the nanowire current
collapses with time constant L_0 / (R_p + R_hs), a few picoseconds for
typical parameters, so the default dt is 1 ps.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .errors import CalibrationError, ConfigError, ParameterError, ResolutionError


@dataclass(frozen=True)
class SndConfig:
    """Electrical description of the detector and its readout.

    All values are SI.  ``l_element`` is not directly measurable and is
    normally set by :func:`calibrate_inductance` against a target pulse fall
    time; ``r_hotspot``, ``i_retrap_fraction`` and ``r_wire_normal`` are
    design values of the two-state hotspot model.
    """

    n_elements: int = 12
    r_parallel: float = 45.2        # ohms, shunt resistor per element
    r_load: float = 50.0            # ohms, readout load
    i_bias: float = 13.0e-6         # A
    i_critical: float = 13.4e-6     # A
    l_element: float = 43.11e-9     # H, series inductance per element
    r_hotspot: float = 5_000.0      # ohms, fired-nanowire plateau
    i_retrap_fraction: float = 0.3  # heal when i_k < fraction * I_C
    r_wire_normal: float = 50_000.0  # ohms, fully normal wire (IV model only)

    def violations(self) -> list[str]:
        out = []
        if self.n_elements < 1 or int(self.n_elements) != self.n_elements:
            out.append("n_elements must be a positive integer")
        for name in ("r_parallel", "r_load", "r_hotspot", "r_wire_normal"):
            if getattr(self, name) <= 0:
                out.append(f"{name} must be > 0")
        if self.l_element <= 0:
            out.append("l_element must be > 0")
        if not 0 < self.i_bias:
            out.append("i_bias must be > 0")
        if not self.i_bias < self.i_critical:
            out.append("i_bias must be < i_critical")
        if not 0 < self.i_retrap_fraction < 1:
            out.append("i_retrap_fraction must be in (0, 1)")
        return out

    def __post_init__(self):
        bad = self.violations()
        if bad:
            raise ConfigError(bad)


@dataclass(frozen=True)
class FiringPattern:
    """Which elements fire and when (photon arrival times in seconds)."""

    fired: tuple[int, ...]
    t_fire: tuple[float, ...]

    def __post_init__(self):
        if len(self.fired) != len(self.t_fire):
            raise ParameterError("fired and t_fire must have equal length")
        if len(set(self.fired)) != len(self.fired):
            raise ParameterError("fired element indices must be distinct")

    @property
    def n_fired(self) -> int:
        return len(self.fired)

    @classmethod
    def simultaneous(cls, n: int, t: float = 0.0) -> "FiringPattern":
        """Elements 0..n-1 all firing at time t."""
        return cls(tuple(range(n)), (float(t),) * n)

    @classmethod
    def empty(cls) -> "FiringPattern":
        return cls((), ())


@dataclass
class TransientTrace:
    """Time series of per-element currents, chain current and load voltage."""

    times: np.ndarray
    i_wire: np.ndarray   # (n_times, N)
    i_chain: np.ndarray  # (n_times,)
    v_out: np.ndarray    # (n_times,)

    @property
    def n_elements(self) -> int:
        return self.i_wire.shape[1]

    def peak_height(self) -> float:
        return float(np.max(self.v_out))

    def fall_time(self) -> float:
        """1/e fall time measured from the pulse peak; NaN if no crossing."""
        ipk = int(np.argmax(self.v_out))
        vpk = self.v_out[ipk]
        if vpk <= 0:
            return float("nan")
        target = vpk / math.e
        below = np.nonzero(self.v_out[ipk:] <= target)[0]
        if below.size == 0:
            return float("nan")
        j = ipk + below[0]
        if j == ipk:
            return 0.0
        # linear interpolation between the bracketing samples
        v0, v1 = self.v_out[j - 1], self.v_out[j]
        frac = (v0 - target) / (v0 - v1) if v1 != v0 else 0.0
        t_cross = self.times[j - 1] + frac * (self.times[j] - self.times[j - 1])
        return float(t_cross - self.times[ipk])

    def to_csv(self, path, stride: int = 1) -> None:
        """Write columns time_s, i_wire_0..i_wire_{N-1}, i_chain, v_out.

        ``stride`` > 1 decimates the rows (the last sample is always kept).
        """
        cols = ["time_s"] + [f"i_wire_{k}" for k in range(self.n_elements)] + ["i_chain", "v_out"]
        idx = list(range(0, self.times.size, max(1, stride)))
        if idx[-1] != self.times.size - 1:
            idx.append(self.times.size - 1)
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for i in idx:
                row = [repr(float(self.times[i]))]
                row += [repr(float(x)) for x in self.i_wire[i]]
                row += [repr(float(self.i_chain[i])), repr(float(self.v_out[i]))]
                fh.write(",".join(row) + "\n")


def chain_current(cfg: SndConfig, i_wire: np.ndarray) -> np.ndarray:
    """Series-chain current given the per-element wire currents."""
    total = i_wire.sum(axis=-1)
    return (cfg.r_load * cfg.i_bias + cfg.r_parallel * total) / (
        cfg.r_load + cfg.n_elements * cfg.r_parallel
    )


@njit(cache=True)
def _rk4_kernel(i0, t_fire, n_steps, dt, r_p, r_l, i_b, l0, r_hs, i_heal, max_step):
    n = i0.shape[0]
    denom = r_l + n * r_p
    rlib = r_l * i_b
    i = i0.copy()
    r = np.zeros(n)
    pending = np.zeros(n, np.uint8)  # 1 until the element has fired
    for k in range(n):
        if np.isfinite(t_fire[k]):
            pending[k] = 1
    out = np.empty((n_steps + 1, n))
    out[0] = i
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    err_step = -1
    for m in range(n_steps):
        t0 = m * dt
        # switch hotspots on at the first grid point at/after the firing time
        for k in range(n):
            if pending[k] == 1 and t_fire[k] <= t0 + 1e-9 * dt:
                r[k] = r_hs
                pending[k] = 0
        for stage in range(4):
            src = i if stage == 0 else tmp
            s = 0.0
            for k in range(n):
                s += src[k]
            ichain = (rlib + r_p * s) / denom
            for k in range(n):
                dk = (r_p * (ichain - src[k]) - r[k] * src[k]) / l0
                if stage == 0:
                    k1[k] = dk
                    tmp[k] = i[k] + 0.5 * dt * dk
                elif stage == 1:
                    k2[k] = dk
                    tmp[k] = i[k] + 0.5 * dt * dk
                elif stage == 2:
                    k3[k] = dk
                    tmp[k] = i[k] + dt * dk
                else:
                    k4[k] = dk
        worst = 0.0
        for k in range(n):
            step_k = (dt / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
            if abs(step_k) > worst:
                worst = abs(step_k)
            i[k] += step_k
            # retrapping: hotspot heals once the wire current is low enough
            if r[k] > 0.0 and i[k] < i_heal:
                r[k] = 0.0
        out[m + 1] = i
        if worst > max_step or not np.isfinite(worst):
            err_step = m + 1
            break
    return out, err_step


def steady_state(cfg: SndConfig) -> TransientTrace:
    """Pre-fire operating point: every wire superconducting and carrying I_B."""
    i_wire = np.full((1, cfg.n_elements), cfg.i_bias)
    return TransientTrace(
        times=np.zeros(1),
        i_wire=i_wire,
        i_chain=np.array([cfg.i_bias]),
        v_out=np.zeros(1),
    )


def simulate_transient(
    cfg: SndConfig,
    pattern: FiringPattern,
    t_end: float = 100e-9,
    dt: float = 1e-12,
) -> TransientTrace:
    """Integrate the network response to a firing pattern.

    Fixed-step classical Runge-Kutta on a uniform grid; hotspot switching is
    aligned to grid points.  Raises :class:`ResolutionError` when any wire
    current changes by more than 20% of I_C within one step, which indicates
    dt is too coarse for the hotspot phase.
    """
    if dt <= 0 or t_end <= 0:
        raise ParameterError("dt and t_end must be > 0")
    for idx, tf in zip(pattern.fired, pattern.t_fire):
        if not 0 <= idx < cfg.n_elements:
            raise ParameterError(f"fired index {idx} outside [0, {cfg.n_elements})")
        if not 0 <= tf < t_end:
            raise ParameterError("t_end must cover all firing times")
    t_fire = np.full(cfg.n_elements, np.inf)
    for idx, tf in zip(pattern.fired, pattern.t_fire):
        t_fire[idx] = tf
    n_steps = max(1, int(round(t_end / dt)))
    i0 = np.full(cfg.n_elements, cfg.i_bias)
    traj, err_step = _rk4_kernel(
        i0,
        t_fire,
        n_steps,
        dt,
        cfg.r_parallel,
        cfg.r_load,
        cfg.i_bias,
        cfg.l_element,
        cfg.r_hotspot,
        cfg.i_retrap_fraction * cfg.i_critical,
        0.2 * cfg.i_critical,
    )
    if err_step >= 0:
        raise ResolutionError(err_step * dt)
    times = np.arange(n_steps + 1) * dt
    i_chain = chain_current(cfg, traj)
    v_out = cfg.r_load * (cfg.i_bias - i_chain)
    return TransientTrace(times=times, i_wire=traj, i_chain=i_chain, v_out=v_out)


def pulse_heights(cfg: SndConfig, t_end: float = 100e-9, dt: float = 1e-12) -> np.ndarray:
    """Peak output voltage H(n) for n = 1..N simultaneous firings."""
    heights = np.empty(cfg.n_elements)
    for n in range(1, cfg.n_elements + 1):
        trace = simulate_transient(cfg, FiringPattern.simultaneous(n), t_end, dt)
        heights[n - 1] = trace.peak_height()
    return heights


def iv_curve(cfg: SndConfig, i_sweep) -> np.ndarray:
    """DC current-voltage points (I, V) for a bias sweep.

    Below I_C the device is superconducting and V = 0.  Above I_C every wire
    is normal and the differential resistance is the full normal resistance
    in parallel with N R_p; with R_wire_normal >> R_p the slope is close to
    N R_p.
    """
    i_sweep = np.asarray(i_sweep, dtype=float)
    n_rp = cfg.n_elements * cfg.r_parallel
    r_norm = cfg.n_elements * cfg.r_wire_normal
    slope = r_norm * n_rp / (r_norm + n_rp)
    v = np.where(i_sweep <= cfg.i_critical, 0.0, i_sweep * slope)
    return np.column_stack([i_sweep, v])


def calibrate_inductance(
    cfg: SndConfig,
    target_fall: float,
    *,
    bracket: tuple[float, float] | None = None,
    rel_tol: float = 2e-3,
) -> float:
    """Find the per-element inductance whose all-fired pulse has the target fall time.

    The 1/e fall time of the N-element simultaneous pulse grows monotonically
    with L_0 (the recovery time constant is L_0 (R_L + N R_p) / (R_p R_L)),
    so a bisection on L_0 converges; the analytic estimate seeds the bracket.
    """
    if target_fall <= 0:
        raise ParameterError("target_fall must be > 0")
    l_est = target_fall * cfg.r_parallel * cfg.r_load / (
        cfg.r_load + cfg.n_elements * cfg.r_parallel
    )
    lo, hi = bracket if bracket is not None else (l_est / 5.0, l_est * 5.0)
    if not 0 < lo < hi:
        raise ParameterError("need 0 < bracket lo < hi")
    # the recovery time constant scales linearly with L, so a bracket whose
    # analytic fall times sit far from the target cannot contain the root
    if hi < l_est / 50.0 or lo > l_est * 50.0:
        raise CalibrationError(
            f"bracket [{lo:.3e}, {hi:.3e}] H is far from the analytic estimate "
            f"{l_est:.3e} H for a {target_fall:.3e} s fall time"
        )
    t_end = 10.0 * target_fall
    pattern = FiringPattern.simultaneous(cfg.n_elements)

    def fall_for(l0: float) -> float:
        trial = replace(cfg, l_element=l0)
        # keep the per-step change under the 20% I_C resolution limit during
        # the hotspot collapse (time constant l0 / (R_hs + R_p))
        dt = min(1e-12, 0.2 * l0 / (cfg.r_hotspot + cfg.r_parallel))
        tau = simulate_transient(trial, pattern, t_end, dt).fall_time()
        return math.inf if math.isnan(tau) else tau

    f_lo = fall_for(lo) - target_fall
    f_hi = fall_for(hi) - target_fall
    if f_lo > 0 or f_hi < 0:
        raise CalibrationError(
            f"target fall time {target_fall:.3e} s not bracketed by L in [{lo:.3e}, {hi:.3e}] H"
        )
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        f_mid = fall_for(mid) - target_fall
        if abs(f_mid) <= rel_tol * target_fall:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1 + 1e-6:
            break
    raise CalibrationError("bisection did not reach the requested tolerance")
