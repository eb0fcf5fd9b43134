"""Gaussian-state tools: stationary covariance, two-mode reduction,
logarithmic negativity, Wigner distribution and squeezing measures.

Quadratures are X = (O + O^+)/sqrt(2), Y = (O - O^+)/(sqrt(2) i), so the
vacuum variance is 1/2 and physical states have symplectic eigenvalues
>= 1/2.  Covariance matrices are plain (6, 6) or (4, 4) float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, NoStationaryStateError, NumericalError, PhysicalityError
from .params import SystemParams, derive

MODES = {"cavity": 0, "magnon": 1, "phonon": 2}
PHYSICALITY_TOL = 1e-9
LYAPUNOV_RESIDUAL_TOL = 1e-10


def mode_index(mode) -> int:
    if isinstance(mode, str):
        try:
            return MODES[mode]
        except KeyError:
            raise DomainError(f"unknown mode {mode!r}; expected one of {list(MODES)}")
    if mode not in (0, 1, 2):
        raise DomainError(f"mode index must be 0, 1 or 2, got {mode!r}")
    return int(mode)


def diffusion_matrix(params: SystemParams, n_th: float | None = None) -> np.ndarray:
    n = derive(params).n_th if n_th is None else n_th
    kb = params.kappa_b * (2.0 * n + 1.0)
    return np.diag([params.kappa_a, params.kappa_a, params.kappa_m, params.kappa_m, kb, kb])


def initial_covariance(n_th: float) -> np.ndarray:
    """Coherent cavity and magnon, thermal phonon."""
    v = n_th + 0.5
    return np.diag([0.5, 0.5, 0.5, 0.5, v, v])


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(V) -> np.ndarray:
    """Ascending symplectic eigenvalues (moduli of the eigenvalues of i Omega V).

    Accepts a single matrix or a stack with shape (..., 2n, 2n).
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[-1] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V))
    return np.sort(ev, axis=-1)[..., ::2]


def is_physical(V, tol: float = PHYSICALITY_TOL) -> bool:
    V = np.asarray(V, dtype=float)
    if not np.allclose(V, V.T, rtol=0, atol=1e-12 * max(1.0, np.abs(V).max())):
        return False
    if np.any(np.linalg.eigvalsh(V) <= 0):
        return False
    return bool(symplectic_eigenvalues(V)[0] >= 0.5 - tol)


def steady_covariance(A, D) -> np.ndarray:
    """Solve A V + V A^T + D = 0 for the stationary covariance.

    Raises :class:`NoStationaryStateError` if ``A`` is not Hurwitz-stable.
    """
    A = np.asarray(getattr(A, "matrix", A), dtype=float)
    D = np.asarray(D, dtype=float)
    if np.linalg.eigvals(A).real.max() >= 0:
        raise NoStationaryStateError("drift matrix has eigenvalues with Re >= 0")
    V = scipy.linalg.solve_continuous_lyapunov(A, -D)
    V = 0.5 * (V + V.T)
    target = LYAPUNOV_RESIDUAL_TOL * np.linalg.norm(D)
    res = A @ V + V @ A.T + D
    if np.linalg.norm(res) > target:
        # one step of iterative refinement
        V = V + scipy.linalg.solve_continuous_lyapunov(A, -res)
        V = 0.5 * (V + V.T)
        res = A @ V + V @ A.T + D
        if np.linalg.norm(res) > target:
            raise NumericalError(
                f"Lyapunov residual {np.linalg.norm(res):.3e} exceeds {target:.3e}")
    return V


@dataclass(frozen=True)
class TwoModeCM:
    """Two-mode covariance in block form [[alpha, beta], [beta^T, gamma]]."""

    matrix: np.ndarray

    @property
    def alpha(self):
        return self.matrix[:2, :2]

    @property
    def beta(self):
        return self.matrix[:2, 2:]

    @property
    def gamma(self):
        return self.matrix[2:, 2:]

    @property
    def det_alpha(self) -> float:
        return float(np.linalg.det(self.alpha))

    @property
    def det_beta(self) -> float:
        return float(np.linalg.det(self.beta))

    @property
    def det_gamma(self) -> float:
        return float(np.linalg.det(self.gamma))

    @property
    def sigma(self) -> float:
        return self.det_alpha + self.det_gamma - 2.0 * self.det_beta


def reduce_two_mode(V, mode_i, mode_j) -> TwoModeCM:
    i, j = mode_index(mode_i), mode_index(mode_j)
    if i == j:
        raise DomainError("two distinct modes are required")
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    V = np.asarray(V, dtype=float)
    return TwoModeCM(V[np.ix_(idx, idx)].copy())


def _as_two_mode(v2) -> TwoModeCM:
    return v2 if isinstance(v2, TwoModeCM) else TwoModeCM(np.asarray(v2, dtype=float))


def nu_minus(v2, tol: float = 1e-9) -> float:
    """Smallest symplectic eigenvalue of the partially transposed two-mode CM."""
    v2 = _as_two_mode(v2)
    s = v2.sigma
    det = float(np.linalg.det(v2.matrix))
    disc = s * s - 4.0 * det
    if disc < 0:
        if disc < -tol * max(s * s, 1.0):
            raise PhysicalityError(f"Sigma^2 - 4 det V = {disc:.3e} < 0")
        disc = 0.0
    inner = 0.5 * (s - math.sqrt(disc))
    if inner < 0:
        if inner < -tol * max(abs(s), 1.0):
            raise PhysicalityError(f"negative squared symplectic eigenvalue {inner:.3e}")
        inner = 0.0
    return math.sqrt(inner)


def log_negativity(v2) -> float:
    """max(0, -ln(2 nu_-)) for a two-mode covariance matrix."""
    nu = nu_minus(v2)
    if 2.0 * nu >= 1.0:
        return 0.0
    if nu == 0.0:
        return math.inf
    return -math.log(2.0 * nu)


def log_negativity_series(V, mode_i="cavity", mode_j="magnon") -> np.ndarray:
    """Vectorised log-negativity for a stack of 6x6 covariances, shape (N, 6, 6)."""
    i, j = mode_index(mode_i), mode_index(mode_j)
    if i == j:
        raise DomainError("two distinct modes are required")
    idx = np.array([2 * i, 2 * i + 1, 2 * j, 2 * j + 1])
    V = np.asarray(V, dtype=float)
    W = V[:, idx[:, None], idx[None, :]]

    def det2(M):
        return M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]

    s = det2(W[:, :2, :2]) + det2(W[:, 2:, 2:]) - 2.0 * det2(W[:, :2, 2:])
    disc = s * s - 4.0 * np.linalg.det(W)
    if np.any(disc < -1e-9 * np.maximum(s * s, 1.0)):
        raise PhysicalityError("Sigma^2 - 4 det V < 0 in covariance series")
    inner = 0.5 * (s - np.sqrt(np.maximum(disc, 0.0)))
    nu = np.sqrt(np.maximum(inner, 0.0))
    with np.errstate(divide="ignore"):
        return np.maximum(0.0, -np.log(2.0 * nu))


def partial_transpose(v2, mode: int = 1) -> np.ndarray:
    """Flip the momentum quadrature of one mode (default the second)."""
    M = np.array(_as_two_mode(v2).matrix, dtype=float)
    k = 2 * mode + 1
    M[k, :] *= -1.0
    M[:, k] *= -1.0
    return M


def entanglement(V, mode_i="cavity", mode_j="magnon") -> float:
    return log_negativity(reduce_two_mode(V, mode_i, mode_j))


@dataclass(frozen=True)
class WignerField:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x))
    gamma: np.ndarray

    @property
    def cell_area(self) -> float:
        return float((self.x[1] - self.x[0]) * (self.y[1] - self.y[0]))

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_area)


def wigner_field(gamma, x=None, y=None, n: int = 201, n_sigma: float = 6.0) -> WignerField:
    """Gaussian Wigner distribution of a single mode with covariance ``gamma``.

    The prefactor is 1/(2 pi sqrt(det gamma)) so the field integrates to one.
    Without explicit ``x``/``y`` the grid spans +-``n_sigma`` standard
    deviations along each quadrature.
    """
    g = np.asarray(gamma, dtype=float)
    if g.shape != (2, 2) or not np.allclose(g, g.T):
        raise DomainError("gamma must be a symmetric 2x2 matrix")
    if np.any(np.linalg.eigvalsh(g) <= 0):
        raise DomainError("gamma must be positive definite")
    if x is None:
        sx = math.sqrt(g[0, 0]) * n_sigma
        x = np.linspace(-sx, sx, n)
    if y is None:
        sy = math.sqrt(g[1, 1]) * n_sigma
        y = np.linspace(-sy, sy, n)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X, Y = np.meshgrid(x, y)
    inv = np.linalg.inv(g)
    q = inv[0, 0] * X * X + 2.0 * inv[0, 1] * X * Y + inv[1, 1] * Y * Y
    W = np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(np.linalg.det(g)))
    return WignerField(x, y, W, g.copy())


def squeezing_degree(gamma) -> float:
    """Smallest quadrature variance relative to the vacuum value 1/2."""
    g = np.asarray(gamma, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (g + g.T))[0] / 0.5)


def anisotropy(gamma) -> float:
    """Ratio of the largest to the smallest eigenvalue of a 2x2 block."""
    ev = np.linalg.eigvalsh(np.asarray(gamma, dtype=float))
    return float(ev[-1] / ev[0])


def time_averaged_entanglement(params: SystemParams, window=None, transient_cut=None,
                               modes=("cavity", "magnon"), branch="upper",
                               samples_per_tau=20, rtol=1e-9):
    """Time average of the log-negativity along a covariance trajectory.

    See :func:`kerrmagno.dynamics.time_averaged_entanglement`.
    """
    from . import dynamics

    return dynamics.time_averaged_entanglement(
        params, window=window, transient_cut=transient_cut, modes=modes,
        branch=branch, samples_per_tau=samples_per_tau, rtol=rtol)
