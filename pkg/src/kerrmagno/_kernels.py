"""Jitted right-hand sides of the mean-field, covariance and tangent systems.

State layout: ``y[0:6] = (Re a, Im a, Re m, Im m, Re b, Im b)``; the
covariance system appends the 21 upper-triangular entries of V (row-major),
the tangent system appends a 6-vector.  Parameter vector layout is given by
the ``P_*`` indices below.
"""

import numpy as np
from numba import njit

P_DELTA_A, P_DELTA_M, P_OMEGA_B = 0, 1, 2
P_KAPPA_A, P_KAPPA_M, P_KAPPA_B = 3, 4, 5
P_G_MA, P_G_MB, P_KERR, P_DRIVE = 6, 7, 8, 9
P_DIFF_A, P_DIFF_M, P_DIFF_B = 10, 11, 12
N_PV = 13

MEAN, COVARIANCE, TANGENT = 0, 1, 2

_IU, _JU = np.triu_indices(6)
TRIU_I = _IU.astype(np.int64)
TRIU_J = _JU.astype(np.int64)


@njit(cache=True)
def mean_rhs(y, pv, dy):
    ar, ai, mr, mi, br, bi = y[0], y[1], y[2], y[3], y[4], y[5]
    da, dm, wb = pv[P_DELTA_A], pv[P_DELTA_M], pv[P_OMEGA_B]
    ka, km, kb = pv[P_KAPPA_A], pv[P_KAPPA_M], pv[P_KAPPA_B]
    gma, gmb, K, drive = pv[P_G_MA], pv[P_G_MB], pv[P_KERR], pv[P_DRIVE]
    n = mr * mr + mi * mi
    nu = dm + 2.0 * K * n + 2.0 * gmb * br
    dy[0] = -ka * ar + da * ai + gma * mi
    dy[1] = -da * ar - ka * ai - gma * mr
    dy[2] = -km * mr + nu * mi + gma * ai + drive
    dy[3] = -nu * mr - km * mi - gma * ar
    dy[4] = -kb * br + wb * bi
    dy[5] = -wb * br - kb * bi - gmb * n


@njit(cache=True)
def fill_drift(y, pv, A):
    """Linearised drift matrix in quadratures (dXa, dYa, dXm, dYm, dXb, dYb)."""
    mr, mi, br = y[2], y[3], y[4]
    da, dm, wb = pv[P_DELTA_A], pv[P_DELTA_M], pv[P_OMEGA_B]
    ka, km, kb = pv[P_KAPPA_A], pv[P_KAPPA_M], pv[P_KAPPA_B]
    gma, gmb, K = pv[P_G_MA], pv[P_G_MB], pv[P_KERR]
    n = mr * mr + mi * mi
    dpp = dm + 4.0 * K * n + 2.0 * gmb * br
    kx = 2.0 * K * (mr * mr - mi * mi)
    ky = 4.0 * K * mr * mi
    gx = 2.0 * gmb * mr
    gy = 2.0 * gmb * mi
    A[:, :] = 0.0
    A[0, 0] = -ka
    A[0, 1] = da
    A[0, 3] = gma
    A[1, 0] = -da
    A[1, 1] = -ka
    A[1, 2] = -gma
    A[2, 1] = gma
    A[2, 2] = -km + ky
    A[2, 3] = dpp - kx
    A[2, 4] = gy
    A[3, 0] = -gma
    A[3, 2] = -dpp - kx
    A[3, 3] = -km - ky
    A[3, 4] = -gx
    A[4, 4] = -kb
    A[4, 5] = wb
    A[5, 2] = -gx
    A[5, 3] = -gy
    A[5, 4] = -wb
    A[5, 5] = -kb


@njit(cache=True)
def unpack_cov(v, V):
    k = 0
    for i in range(6):
        for j in range(i, 6):
            V[i, j] = v[k]
            V[j, i] = v[k]
            k += 1


@njit(cache=True)
def pack_cov(V, v):
    k = 0
    for i in range(6):
        for j in range(i, 6):
            v[k] = V[i, j]
            k += 1


@njit(cache=True)
def rhs(mode, t, y, pv, dy):
    mean_rhs(y, pv, dy)
    if mode == MEAN:
        return
    A = np.empty((6, 6))
    fill_drift(y, pv, A)
    if mode == COVARIANCE:
        V = np.empty((6, 6))
        unpack_cov(y[6:], V)
        AV = A @ V
        k = 6
        for i in range(6):
            for j in range(i, 6):
                dy[k] = AV[i, j] + AV[j, i]
                k += 1
        # diffusion is diagonal; diagonal packed offsets are 0, 6, 11, 15, 18, 20
        dy[6 + 0] += pv[P_DIFF_A]
        dy[6 + 6] += pv[P_DIFF_A]
        dy[6 + 11] += pv[P_DIFF_M]
        dy[6 + 15] += pv[P_DIFF_M]
        dy[6 + 18] += pv[P_DIFF_B]
        dy[6 + 20] += pv[P_DIFF_B]
    elif mode == TANGENT:
        for i in range(6):
            s = 0.0
            for j in range(6):
                s += A[i, j] * y[6 + j]
            dy[6 + i] = s
