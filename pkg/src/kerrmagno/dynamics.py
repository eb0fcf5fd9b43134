"""Time evolution of the mean field and of the Gaussian fluctuations.

Times are seconds throughout the API; :attr:`Trajectory.t_tau` gives the same
grid in units of the mechanical period tau = 2pi/omega_b.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import _kernels as K
from ._rk import OK, STEP_UNDERFLOW, dopri5
from .errors import DomainError, InsufficientDataError, IntegrationError, PhysicalityError
from .gaussian import (PHYSICALITY_TOL, diffusion_matrix, initial_covariance,
                       log_negativity, log_negativity_series, reduce_two_mode,
                       steady_covariance,
                       symplectic_eigenvalues)
from .params import SystemParams, derive
from .stability import classify_phase, drift_matrix
from .steady import MeanState

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_TRANSIENT_TAU = 50.0
DEFAULT_WINDOW_TAU = 200.0
PERTURBATION = 1e-3
MAX_STEPS = 50_000_000


def param_vector(params: SystemParams) -> np.ndarray:
    dp = derive(params)
    pv = np.empty(K.N_PV)
    pv[K.P_DELTA_A] = dp.delta_a
    pv[K.P_DELTA_M] = dp.delta_m
    pv[K.P_OMEGA_B] = params.omega_b
    pv[K.P_KAPPA_A] = params.kappa_a
    pv[K.P_KAPPA_M] = params.kappa_m
    pv[K.P_KAPPA_B] = params.kappa_b
    pv[K.P_G_MA] = params.g_ma
    pv[K.P_G_MB] = params.g_mb
    pv[K.P_KERR] = params.kerr_K
    pv[K.P_DRIVE] = dp.drive_amp
    D = np.diag(diffusion_matrix(params, dp.n_th))
    pv[K.P_DIFF_A], pv[K.P_DIFF_M], pv[K.P_DIFF_B] = D[0], D[2], D[4]
    return pv


def pack_covariance(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    return V[K.TRIU_I, K.TRIU_J].copy()


def unpack_covariance(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    V = np.empty(v.shape[:-1] + (6, 6))
    V[..., K.TRIU_I, K.TRIU_J] = v
    V[..., K.TRIU_J, K.TRIU_I] = v
    return V


@dataclass
class Trajectory:
    """Sampled solution on a strictly increasing time grid.

    ``y`` holds (Re a, Im a, Re m, Im m, Re b, Im b) per sample, ``cov`` the
    6x6 covariance per sample when fluctuations were integrated.
    ``truncated`` is set when integration stopped early.
    """

    t: np.ndarray
    y: np.ndarray
    tau: float
    cov: np.ndarray | None = None
    truncated: bool = False
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def t_tau(self) -> np.ndarray:
        return self.t / self.tau

    @property
    def amplitudes(self) -> np.ndarray:
        """Complex (a, m, b) per sample, shape (N, 3)."""
        return self.y[:, 0::2] + 1j * self.y[:, 1::2]

    @property
    def intensity(self) -> np.ndarray:
        return self.y[:, 2] ** 2 + self.y[:, 3] ** 2

    def state(self, k: int) -> MeanState:
        return MeanState.from_real(self.y[k])

    def entanglement(self, mode_i="cavity", mode_j="magnon") -> np.ndarray:
        if self.cov is None:
            raise DomainError("trajectory carries no covariance samples")
        return log_negativity_series(self.cov, mode_i, mode_j)

    def to_csv(self, path, entanglement=False, config=None):
        """Columns t, t/tau, Re/Im of a, m, b, |m|^2, optional V_ij, optional E_am.

        ``config`` (a JSON-serialisable dict) is written first as a ``#`` comment.
        """
        header = ["t", "t_over_tau", "re_a", "im_a", "re_m", "im_m", "re_b", "im_b",
                  "magnon_number"]
        if self.cov is not None:
            header += [f"V{i + 1}{j + 1}" for i, j in zip(K.TRIU_I, K.TRIU_J)]
            if entanglement:
                header.append("E_am")
        e_am = self.entanglement() if (self.cov is not None and entanglement) else None
        with open(path, "w", newline="") as fh:
            if config is not None:
                fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(header)
            for k in range(len(self.t)):
                row = [repr(float(self.t[k])), repr(float(self.t_tau[k]))]
                row += [repr(float(v)) for v in self.y[k]]
                row.append(repr(float(self.intensity[k])))
                if self.cov is not None:
                    row += [repr(float(v)) for v in pack_covariance(self.cov[k])]
                    if e_am is not None:
                        row.append(repr(float(e_am[k])))
                w.writerow(row)
            if self.truncated:
                w.writerow(["# truncated", repr(float(self.info.get("t_reached", math.nan)))])


def _time_grid(params, t_span, t_eval, samples_per_tau):
    if np.ndim(t_span) == 0:
        t0, t1 = 0.0, float(t_span)
    else:
        t0, t1 = (float(v) for v in t_span)
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise DomainError(f"invalid time span ({t0}, {t1})")
    if t_eval is None:
        if t1 == t0:
            return t0, np.empty(0)
        n = max(2, int(math.ceil((t1 - t0) / params.tau * samples_per_tau)) + 1)
        t_eval = np.linspace(t0, t1, n)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.size and (np.any(np.diff(t_eval) <= 0) or t_eval[0] < t0):
        raise DomainError("t_eval must be strictly increasing and start at or after t0")
    return t0, t_eval


def _run(mode, t0, y0, t_eval, pv, rtol, atol):
    """Integrate; on failure retry once with a ten times tighter tolerance."""
    ys, n_out, status, t_reached, n_steps, n_rej = dopri5(
        mode, t0, y0, t_eval, pv, rtol, atol, 0.0, MAX_STEPS)
    if status != OK:
        log.warning("integration stopped at t=%g (status %d); retrying with rtol=%g",
                    t_reached, status, rtol / 10)
        ys2, n2, status2, t2, s2, r2 = dopri5(
            mode, t0, y0, t_eval, pv, rtol / 10, atol / 10, 0.0, MAX_STEPS)
        if n2 >= n_out:
            ys, n_out, status, t_reached, n_steps, n_rej = ys2, n2, status2, t2, s2, r2
    info = dict(status=int(status), t_reached=float(t_reached), n_steps=int(n_steps),
                n_rejected=int(n_rej), rtol=rtol)
    return ys[:n_out], status, info


def _mean_atol(params, y0, tol):
    dp = derive(params)
    scale = max(1.0, float(np.abs(y0).max()) if y0.size else 0.0,
                dp.drive_amp / dp.kappa_0)
    return tol * scale


def _fail(status, info, traj):
    what = ("step-size underflow (problem may be stiff)" if status == STEP_UNDERFLOW
            else "step budget exhausted")
    raise IntegrationError(
        f"integration failed at t={info['t_reached']:.6g} s: {what}; "
        f"{info['n_steps']} steps, {info['n_rejected']} rejected", partial=traj)


def integrate_mean_field(params: SystemParams, initial: MeanState, t_span,
                         tol: float = DEFAULT_TOL, t_eval=None,
                         samples_per_tau: int = 20) -> Trajectory:
    """Integrate the semiclassical equations of motion (noise dropped).

    ``t_span`` is a duration or a ``(t0, t1)`` pair in seconds; output is on
    ``t_eval`` or on a uniform grid with ``samples_per_tau`` points per tau.
    """
    t0, t_eval = _time_grid(params, t_span, t_eval, samples_per_tau)
    y0 = initial.as_real()
    if not np.all(np.isfinite(y0)):
        raise DomainError("initial state must be finite")
    atol = np.full(6, _mean_atol(params, y0, tol))
    ys, status, info = _run(K.MEAN, t0, y0, t_eval, param_vector(params), tol, atol)
    traj = Trajectory(t_eval[: len(ys)], ys, params.tau, truncated=status != OK, info=info)
    if status != OK:
        _fail(status, info, traj)
    return traj


def integrate_covariance(params: SystemParams, initial_mean: MeanState, V0=None,
                         t_span=0.0, tol: float = DEFAULT_TOL, t_eval=None,
                         samples_per_tau: int = 20, check_physical: bool = True,
                         physicality_tol: float = PHYSICALITY_TOL) -> Trajectory:
    """Co-integrate the mean field and the covariance equation dV/dt = AV + VA^T + D.

    The drift matrix is rebuilt from the instantaneous mean state.  Only the
    21 independent entries of V are integrated, so every sample is exactly
    symmetric.  ``V0`` defaults to coherent cavity/magnon and a thermal
    phonon.  Each sample is checked against the uncertainty bound; the
    tolerance is relative to ``max(1, ||V||_2)``.
    """
    dp = derive(params)
    V0 = initial_covariance(dp.n_th) if V0 is None else np.asarray(V0, dtype=float)
    if V0.shape != (6, 6) or not np.allclose(V0, V0.T):
        raise DomainError("V0 must be a symmetric 6x6 matrix")
    if symplectic_eigenvalues(V0)[0] < 0.5 - physicality_tol:
        raise DomainError("V0 violates the uncertainty principle")
    t0, t_eval = _time_grid(params, t_span, t_eval, samples_per_tau)
    ym = initial_mean.as_real()
    y0 = np.concatenate([ym, pack_covariance(V0)])
    atol = np.empty(27)
    atol[:6] = _mean_atol(params, ym, tol)
    atol[6:] = tol * max(1.0, float(np.abs(V0).max()))
    ys, status, info = _run(K.COVARIANCE, t0, y0, t_eval, param_vector(params), tol, atol)
    cov = unpack_covariance(ys[:, 6:])
    traj = Trajectory(t_eval[: len(ys)], ys[:, :6].copy(), params.tau, cov=cov,
                      truncated=status != OK, info=info)
    if status != OK:
        _fail(status, info, traj)
    if check_physical and len(cov):
        nu = symplectic_eigenvalues(cov)[:, 0]
        bound = 0.5 - physicality_tol * np.maximum(1.0, np.linalg.norm(cov, 2, axis=(1, 2)))
        bad = np.nonzero(nu < bound)[0]
        if bad.size:
            k = bad[0]
            raise PhysicalityError(
                f"covariance at t={traj.t[k]:.6g} s has symplectic eigenvalue "
                f"{nu[k]:.12g} < 1/2; tighten the integration tolerance")
    return traj


def perturb(state: MeanState, rel: float = PERTURBATION) -> MeanState:
    """Displace <m> by ``rel * |<m>|`` along +X."""
    m = state.m_mean + rel * abs(state.m_mean)
    return MeanState(state.a_mean, m, state.b_mean)


def select_fixed_point(params: SystemParams, branch="upper", phase=None):
    """Pick a fixed point and report whether it is stable.

    ``branch`` is ``"upper"``, ``"lower"``, ``"middle"`` or a root index.
    ``"upper"``/``"lower"`` prefer stable roots and fall back to the
    largest/smallest root when none is stable.
    """
    phase = classify_phase(params) if phase is None else phase
    reps = phase.reports
    if isinstance(branch, int):
        rep = reps[branch]
    elif branch == "middle":
        rep = reps[len(reps) // 2]
    elif branch in ("upper", "lower"):
        stable = [r for r in reps if r.stable]
        pool = stable if stable else reps
        rep = pool[-1] if branch == "upper" else pool[0]
    else:
        raise DomainError(f"unknown branch {branch!r}")
    return rep.mean_state, rep.stable


@dataclass(frozen=True)
class LimitCycleReport:
    periodic: bool
    period: float
    amplitude: float
    transient_time: float
    spacing_spread: float = math.nan
    amplitude_drift: float = math.nan


def _peak_times(t, x, distance):
    idx, _ = find_peaks(x, distance=max(1, int(distance)))
    idx = idx[(idx > 0) & (idx < len(x) - 1)]
    times = []
    dt = t[1] - t[0]
    for i in idx:
        y0, y1, y2 = x[i - 1], x[i], x[i + 1]
        den = y0 - 2.0 * y1 + y2
        off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        times.append(t[i] + off * dt)
    return np.array(times)


def detect_limit_cycle(traj: Trajectory, transient_cut=None,
                       detect_tol: float = 0.01) -> LimitCycleReport:
    """Decide whether |<m>|^2 settles onto a periodic orbit.

    Samples before ``transient_cut`` [s] (default 50 tau) are discarded.  The
    period comes from the first autocorrelation peak; it is confirmed when the
    relative spread of successive-maximum spacings is below ``detect_tol`` and
    the peak-to-peak amplitude of the two halves of the window agrees within
    ``detect_tol``.
    """
    if transient_cut is None:
        transient_cut = DEFAULT_TRANSIENT_TAU * traj.tau
    if len(traj) < 8 or traj.t[-1] - traj.t[0] < 2.0 * transient_cut:
        raise InsufficientDataError(
            "trajectory must be longer than twice the transient cut")
    keep = traj.t >= traj.t[0] + transient_cut
    t = traj.t[keep]
    x = traj.intensity[keep]
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6):
        raise DomainError("limit-cycle detection needs a uniform time grid")
    mean = float(np.mean(x))
    amp = float(np.ptp(x))
    not_periodic = LimitCycleReport(False, math.nan, amp, transient_cut)
    if amp <= 1e-9 * max(abs(mean), 1e-300):
        return not_periodic

    xc = x - mean
    n = len(xc)
    spec = np.fft.rfft(xc, 2 * n)
    acf = np.fft.irfft(spec * np.conj(spec))[:n]
    acf /= acf[0]
    below = np.nonzero(acf < 0)[0]
    if below.size == 0:
        return not_periodic
    peaks, _ = find_peaks(acf[below[0]:])
    if peaks.size == 0:
        return not_periodic
    lag = peaks[0] + below[0]
    if acf[lag] < 0.5:
        return not_periodic
    y0, y1, y2 = acf[lag - 1], acf[lag], acf[lag + 1] if lag + 1 < n else acf[lag]
    den = y0 - 2.0 * y1 + y2
    period = (lag + (0.5 * (y0 - y2) / den if den != 0 else 0.0)) * dt[0]

    times = _peak_times(t, x, 0.7 * period / dt[0])
    if len(times) < 4:
        return LimitCycleReport(False, period, amp, transient_cut)
    spacing = np.diff(times)
    spread = float(np.std(spacing) / np.mean(spacing))
    half = len(x) // 2
    a1, a2 = np.ptp(x[:half]), np.ptp(x[half:])
    drift = float(abs(a1 - a2) / max(a1, a2))
    periodic = spread < detect_tol and drift < detect_tol
    return LimitCycleReport(bool(periodic), float(np.mean(spacing)) if periodic else period,
                            amp, transient_cut, spread, drift)


@dataclass(frozen=True)
class LyapunovEstimate:
    """Maximal Lyapunov exponent [1/s] with its running average."""

    rate: float
    omega_b: float
    converged: bool
    times: np.ndarray
    running: np.ndarray

    @property
    def rate_over_omega_b(self) -> float:
        return self.rate / self.omega_b


def max_lyapunov_exponent(params: SystemParams, initial: MeanState, horizon: float,
                          renorm_interval: float, transient: float = 0.0,
                          tol: float = DEFAULT_TOL, abs_floor: float | None = None,
                          seed: int = 0) -> LyapunovEstimate:
    """Benettin estimate of the largest Lyapunov exponent of the mean field.

    A tangent vector is propagated with the drift matrix alongside the
    trajectory and renormalised every ``renorm_interval`` seconds after a
    ``transient``.  The estimate is flagged unconverged when the running
    average changes by more than 5% over the last quarter of the horizon,
    unless the change is below ``abs_floor`` (default 1e-4 omega_b).
    """
    if not (horizon > 0 and renorm_interval > 0) or renorm_interval > horizon:
        raise DomainError("need 0 < renorm_interval <= horizon")
    pv = param_vector(params)
    y = initial.as_real()
    if transient > 0:
        y = integrate_mean_field(params, initial, transient, tol=tol,
                                 t_eval=[0.0, transient]).y[-1]
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(6)
    w /= np.linalg.norm(w)
    n_seg = int(round(horizon / renorm_interval))
    atol = np.empty(12)
    atol[:6] = _mean_atol(params, y, tol)
    atol[6:] = tol
    total = 0.0
    times = np.empty(n_seg)
    running = np.empty(n_seg)
    for k in range(n_seg):
        z0 = np.concatenate([y, w])
        ys, status, info = _run(K.TANGENT, 0.0, z0, np.array([renorm_interval]), pv, tol, atol)
        if status != OK:
            _fail(status, info, None)
        y = ys[-1, :6]
        norm = np.linalg.norm(ys[-1, 6:])
        total += math.log(norm)
        w = ys[-1, 6:] / norm
        times[k] = (k + 1) * renorm_interval
        running[k] = total / times[k]
    rate = float(running[-1])
    floor = 1e-4 * params.omega_b if abs_floor is None else abs_floor
    ref = running[int(0.75 * (n_seg - 1))]
    change = abs(rate - ref)
    converged = change <= 0.05 * abs(rate) or change <= floor
    return LyapunovEstimate(rate, params.omega_b, bool(converged), times, running)


@dataclass(frozen=True)
class EntanglementAverage:
    mean: float
    std: float
    times: np.ndarray
    values: np.ndarray
    stable_start: bool


def time_averaged_entanglement(params: SystemParams, window=None, transient_cut=None,
                               modes=("cavity", "magnon"), branch="upper",
                               samples_per_tau: int = 20, rtol: float = DEFAULT_TOL,
                               initial: MeanState | None = None) -> EntanglementAverage:
    """Average log-negativity over ``[transient_cut, transient_cut + window]``.

    Starts from the chosen fixed point (perturbed by 1e-3 along +X when it is
    unstable) with coherent cavity/magnon and thermal phonon fluctuations.
    Defaults: 50 tau transient, 200 tau window.
    """
    tau = params.tau
    transient_cut = DEFAULT_TRANSIENT_TAU * tau if transient_cut is None else transient_cut
    window = DEFAULT_WINDOW_TAU * tau if window is None else window
    if window <= 0 or transient_cut < 0:
        raise DomainError("window must be > 0 and transient_cut >= 0")
    stable = False
    if initial is None:
        state, stable = select_fixed_point(params, branch)
        initial = state if stable else perturb(state)
    n = max(2, int(math.ceil(window / tau * samples_per_tau)) + 1)
    t_eval = np.linspace(transient_cut, transient_cut + window, n)
    traj = integrate_covariance(params, initial, None, (0.0, t_eval[-1]), tol=rtol,
                                t_eval=t_eval)
    values = traj.entanglement(*modes)
    return EntanglementAverage(float(values.mean()), float(values.std()), traj.t, values,
                               stable)


def steady_entanglement(params: SystemParams, state: MeanState,
                        modes=("cavity", "magnon")) -> float:
    """Log-negativity of the stationary state around a stable fixed point."""
    A = drift_matrix(params, state)
    V = steady_covariance(A, diffusion_matrix(params))
    return log_negativity(reduce_two_mode(V, *modes))
