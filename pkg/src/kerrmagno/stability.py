"""Linearised fluctuation dynamics and fixed-point stability."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .params import SystemParams, derive
from .steady import CubicSolution, MeanState, magnon_intensities, mean_state_from_intensity

MARGINAL_TOL = 1e-9

# Region labels keyed by (number of roots, number of stable roots).
REGIONS = {(1, 1): "1S0U", (3, 2): "2S1U", (1, 0): "0S1U", (3, 1): "1S2U"}
DEGENERATE = "degenerate"


def mean_field_rhs(params: SystemParams, state: MeanState):
    """Time derivatives (da/dt, dm/dt, db/dt) of the mean amplitudes, noise dropped."""
    p = params
    dp = derive(p)
    a, m, b = state.a_mean, state.m_mean, state.b_mean
    n = abs(m) ** 2
    da = -(1j * dp.delta_a + p.kappa_a) * a - 1j * p.g_ma * m
    dm = (-(1j * dp.delta_m + p.kappa_m) * m - 1j * p.g_ma * a
          - 2j * p.kerr_K * n * m - 1j * p.g_mb * m * (b + b.conjugate())
          + dp.drive_amp)
    db = -(1j * p.omega_b + p.kappa_b) * b - 1j * p.g_mb * n
    return complex(da), complex(dm), complex(db)


@dataclass(frozen=True)
class DriftMatrix:
    """6x6 drift matrix with the state-dependent coefficients it was built from.

    ``delta_m_pp`` is the twice-shifted magnon detuning, ``kerr_shift`` the
    complex Kerr squeezing term 2K<m>^2 and ``coupling`` the effective
    magnomechanical coupling 2 g_mb <m>.
    """

    matrix: np.ndarray
    delta_m_pp: float
    kerr_shift: complex
    coupling: complex
    state: MeanState | None = None


def drift_matrix(params: SystemParams, state: MeanState) -> DriftMatrix:
    p = params
    dp = derive(p)
    m = state.m_mean
    n = abs(m) ** 2
    delta_m_p = dp.delta_m + 2.0 * p.kerr_K * n + 2.0 * p.g_mb * state.b_mean.real
    dpp = delta_m_p + 2.0 * p.kerr_K * n
    dk = 2.0 * p.kerr_K * m * m
    g = 2.0 * p.g_mb * m
    kx, ky, gx, gy = dk.real, dk.imag, g.real, g.imag
    ka, km, kb = p.kappa_a, p.kappa_m, p.kappa_b
    da, gma, wb = dp.delta_a, p.g_ma, p.omega_b
    A = np.array([
        [-ka, da, 0.0, gma, 0.0, 0.0],
        [-da, -ka, -gma, 0.0, 0.0, 0.0],
        [0.0, gma, -km + ky, dpp - kx, gy, 0.0],
        [-gma, 0.0, -dpp - kx, -km - ky, -gx, 0.0],
        [0.0, 0.0, 0.0, 0.0, -kb, wb],
        [0.0, 0.0, -gx, -gy, -wb, -kb],
    ])
    return DriftMatrix(A, float(dpp), complex(dk), complex(g), state)


@dataclass(frozen=True)
class FixedPointReport:
    mean_state: MeanState | None
    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool
    marginal: bool
    hopf_like: bool

    @property
    def status(self) -> str:
        if self.marginal:
            return "marginal"
        return "stable" if self.stable else "unstable"


def classify_fixed_point(A, state: MeanState | None = None,
                         marginal_tol: float = MARGINAL_TOL) -> FixedPointReport:
    """Eigenvalue-based stability of a drift matrix.

    Eigenvalues with ``|max Re| <= marginal_tol * ||A||_2`` are reported as
    marginal (neither stable nor unstable).
    """
    if isinstance(A, DriftMatrix):
        state = A.state if state is None else state
        A = A.matrix
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NumericalError("drift matrix contains non-finite entries")
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    ev = ev[np.lexsort((ev.imag, -ev.real))]
    max_re = float(ev[0].real)
    band = marginal_tol * np.linalg.norm(A, 2)
    marginal = abs(max_re) <= band
    stable = max_re < 0 and not marginal
    lead = ev[0]
    hopf = bool(max_re > band and abs(lead.imag) > band)
    return FixedPointReport(state, ev, max_re, bool(stable), bool(marginal), hopf)


@dataclass(frozen=True)
class PhasePoint:
    region: str
    reports: list = field(default_factory=list)
    cubic: CubicSolution | None = None

    @property
    def n_roots(self) -> int:
        return len(self.reports)

    @property
    def n_stable(self) -> int:
        return sum(r.stable for r in self.reports)

    @property
    def intensities(self):
        return tuple(r.mean_state.intensity for r in self.reports)


def region_label(n_roots, n_stable, degenerate=False):
    if degenerate:
        return DEGENERATE
    return REGIONS.get((n_roots, n_stable), f"{n_stable}S{n_roots - n_stable}U")


def classify_phase(params: SystemParams) -> PhasePoint:
    """Number and stability of all fixed points for one parameter set."""
    dp = derive(params)
    cubic = magnon_intensities(dp)
    reports = []
    for I in cubic.roots:
        state = mean_state_from_intensity(params, I, dp)
        reports.append(classify_fixed_point(drift_matrix(params, state)))
    degenerate = cubic.degenerate or any(r.marginal for r in reports)
    label = region_label(len(reports), sum(r.stable for r in reports), degenerate)
    return PhasePoint(label, reports, cubic)
