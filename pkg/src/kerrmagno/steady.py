"""Semiclassical fixed points: magnon-intensity cubic, switching points and
the bistable drive window.

The cubic ``K'^2 I^3 + 2 D0 K' I^2 + (D0^2 + k0^2) I - Omega^2 = 0`` has
coefficients spanning ~30 orders of magnitude for realistic parameters, so it
is solved in the balanced variable ``x = K' I / k0``::

    x^3 + 2 d x^2 + (d^2 + 1) x - w = 0,   d = D0/k0,  w = K' Omega^2 / k0^3
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BistabilitySignError, DomainError, NoKerrTurningPoints
from .params import DerivedParams, SystemParams, derive, drive_power_from_amplitude

# Relative band around a vanishing discriminant treated as degenerate.
DEGENERACY_TOL = 1e-8
# Companion-matrix roots with |Im| <= IMAG_TOL * |Re| count as real.
IMAG_TOL = 1e-8
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class MeanState:
    """Complex mean amplitudes of cavity, magnon and phonon."""

    a_mean: complex
    m_mean: complex
    b_mean: complex

    @property
    def intensity(self) -> float:
        return abs(self.m_mean) ** 2

    def as_real(self) -> np.ndarray:
        """(Re a, Im a, Re m, Im m, Re b, Im b)."""
        return np.array([self.a_mean.real, self.a_mean.imag,
                         self.m_mean.real, self.m_mean.imag,
                         self.b_mean.real, self.b_mean.imag])

    @classmethod
    def from_real(cls, y) -> "MeanState":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), complex(y[4], y[5]))

    @classmethod
    def zero(cls) -> "MeanState":
        return cls(0j, 0j, 0j)


@dataclass(frozen=True)
class CubicSolution:
    """Real (non-negative) roots of the intensity cubic, ascending.

    ``degenerate`` marks a discriminant inside the tolerance band, where two
    or three roots have merged; merged roots are reported once.
    """

    roots: tuple
    discriminant_lhs: float
    has_three_roots: bool
    degenerate: bool = False


def _balanced(dp: DerivedParams):
    d = dp.delta_0 / dp.kappa_0
    w = dp.kerr_eff * dp.drive_amp**2 / dp.kappa_0**3
    return d, w


def _balanced_discriminant(d, w):
    """Three-root condition LHS divided by k0^6, plus its magnitude scale."""
    terms = (27.0 * w * w, 4.0 * d * w * (d * d + 9.0), 4.0 * (d * d + 1.0) ** 2)
    return sum(terms), sum(abs(t) for t in terms)


def three_root_discriminant(dp: DerivedParams) -> float:
    """LHS of ``27K'^2 W^2 + 4 D0 K' W (D0^2 + 9k0^2) + 4k0^2 (D0^2 + k0^2)^2``
    with ``W = Omega^2``; three distinct real roots exist iff it is negative."""
    K, D, k, W = dp.kerr_eff, dp.delta_0, dp.kappa_0, dp.drive_amp**2
    return (27.0 * K * K * W * W + 4.0 * D * K * W * (D * D + 9.0 * k * k)
            + 4.0 * k * k * (D * D + k * k) ** 2)


def _polish(x, d, w, iters=3):
    # Newton refinement on the balanced cubic.
    for _ in range(iters):
        f = x * ((x + d) ** 2 + 1.0) - w
        fp = 3.0 * x * x + 4.0 * d * x + d * d + 1.0
        if fp == 0.0:
            break
        step = f / fp
        x -= step
        if abs(step) <= 1e-16 * max(abs(x), 1e-300):
            break
    return x


def magnon_intensities(dp: DerivedParams) -> CubicSolution:
    """All real roots of the magnon-intensity cubic."""
    omega = dp.drive_amp
    if omega < 0:
        raise DomainError("drive amplitude must be >= 0")
    lhs = three_root_discriminant(dp)
    if omega == 0:
        return CubicSolution((0.0,), lhs, False)
    K, k0 = dp.kerr_eff, dp.kappa_0
    if K == 0:
        return CubicSolution((omega**2 / (dp.delta_0**2 + k0**2),), lhs, False)

    d, w = _balanced(dp)
    disc, scale = _balanced_discriminant(d, w)
    degenerate = abs(disc) <= DEGENERACY_TOL * scale
    three = disc < 0 and not degenerate

    z = np.roots([1.0, 2.0 * d, d * d + 1.0, -w])
    if three:
        xs = sorted(_polish(float(r.real), d, w) for r in z)
    elif degenerate:
        real = [r for r in z if abs(r.imag) <= 1e-4 * max(abs(r.real), 1.0)]
        xs = sorted(_polish(float(r.real), d, w) for r in real) if real else \
            [_polish(float(z[np.argmin(np.abs(z.imag))].real), d, w)]
    else:
        xs = [_polish(float(z[np.argmin(np.abs(z.imag))].real), d, w)]

    intensities = []
    for x in xs:
        intensity = k0 * x / K
        if intensity < 0:
            # Only reachable through rounding near I = 0.
            intensity = 0.0
        if intensities and abs(intensity - intensities[-1]) <= \
                1e-6 * max(abs(intensity), 1e-300):
            continue
        intensities.append(intensity)
    return CubicSolution(tuple(intensities), lhs, three, degenerate)


def cubic_residual(dp: DerivedParams, intensity: float) -> float:
    """Cubic LHS at ``intensity`` relative to Omega^2 (or absolute if Omega=0)."""
    K, D, k = dp.kerr_eff, dp.delta_0, dp.kappa_0
    I = intensity
    W = dp.drive_amp**2
    r = I * ((D + K * I) ** 2 + k * k) - W
    return r / W if W > 0 else r


def mean_state_from_intensity(params: SystemParams, intensity: float,
                              dp: DerivedParams | None = None,
                              tol: float = RESIDUAL_TOL) -> MeanState:
    """Mean amplitudes belonging to a root ``intensity`` of the cubic."""
    dp = derive(params) if dp is None else dp
    res = cubic_residual(dp, intensity)
    if not abs(res) <= tol:
        raise DomainError(
            f"intensity {intensity!r} is not a fixed point (relative residual {res:.3e})")
    m = -1j * dp.drive_amp / ((dp.delta_0 + dp.kerr_eff * intensity) - 1j * dp.kappa_0)
    a = -params.g_ma * m / (dp.delta_a - 1j * params.kappa_a)
    b = -params.g_mb * abs(m) ** 2 / (params.omega_b - 1j * params.kappa_b)
    return MeanState(complex(a), complex(m), complex(b))


def switching_points(dp: DerivedParams):
    """Intensities where dOmega/dI = 0, ascending, or ``None``.

    Returns a pair ``(I_minus, I_plus)``; when ``D0^2 = 3 k0^2`` (within a
    relative 1e-12) both entries coincide.
    """
    K, D, k = dp.kerr_eff, dp.delta_0, dp.kappa_0
    if K == 0:
        raise NoKerrTurningPoints("effective Kerr coefficient is zero")
    disc = D * D - 3.0 * k * k
    if abs(disc) <= 1e-12 * (D * D + 3.0 * k * k):
        disc = 0.0
    if disc < 0:
        return None
    root = math.sqrt(disc)
    pts = sorted(((-2.0 * D - root) / (3.0 * K), (-2.0 * D + root) / (3.0 * K)))
    if pts[0] <= 0:
        return None
    return pts[0], pts[1]


def critical_drive(dp: DerivedParams) -> float:
    """Closed-form critical drive amplitude sqrt(-8 D0^3 / (27 K')).

    Diagnostic only; bistability classification uses the discriminant.
    """
    D, K = dp.delta_0, dp.kerr_eff
    if D == 0:
        return 0.0
    if K == 0:
        raise NoKerrTurningPoints("effective Kerr coefficient is zero")
    radicand = -8.0 * D**3 / (27.0 * K)
    if radicand < 0:
        cond = "Delta_m < eta*Delta_a" if K > 0 else "Delta_m > eta*Delta_a"
        raise BistabilitySignError(
            f"negative radicand: bistability needs {cond} for K' {'>' if K > 0 else '<'} 0")
    return math.sqrt(radicand)


def bistable_amplitude_window(dp: DerivedParams):
    """Range of Omega^2 with three real roots, or ``None``."""
    K, k = dp.kerr_eff, dp.kappa_0
    if K == 0:
        return None
    d = dp.delta_0 / k
    # 27 w^2 + 4 d (d^2+9) w + 4 (d^2+1)^2 = 0 in w = K' Omega^2 / k0^3
    qa, qb, qc = 27.0, 4.0 * d * (d * d + 9.0), 4.0 * (d * d + 1.0) ** 2
    disc = qb * qb - 4.0 * qa * qc
    if disc <= 0:
        return None
    q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
    ws = sorted((q / qa, qc / q))
    omegas_sq = sorted(wi * k**3 / K for wi in ws)
    if omegas_sq[0] <= 0:
        return None
    return omegas_sq[0], omegas_sq[1]


def bistable_power_window(params: SystemParams, p_range=None):
    """Drive-power interval [W] in which three fixed points coexist.

    ``p_range`` (lo, hi) optionally clips the interval; ``None`` is returned
    when no window exists or it does not intersect ``p_range``.
    """
    dp = derive(params)
    win = bistable_amplitude_window(dp)
    if win is None:
        return None
    lo, hi = (drive_power_from_amplitude(math.sqrt(x), params.omega_d, params.kappa_m)
              for x in win)
    if p_range is not None:
        p_lo, p_hi = p_range
        if not (math.isfinite(p_lo) and math.isfinite(p_hi)):
            raise DomainError("p_range must be finite")
        lo, hi = max(lo, p_lo), min(hi, p_hi)
        if lo >= hi:
            return None
    return lo, hi


def fixed_points(params: SystemParams):
    """Cubic solution and the corresponding mean states."""
    dp = derive(params)
    sol = magnon_intensities(dp)
    states = [mean_state_from_intensity(params, I, dp) for I in sol.roots]
    return sol, states
