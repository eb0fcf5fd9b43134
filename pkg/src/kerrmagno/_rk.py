"""Adaptive Dormand-Prince 5(4) integrator compiled with numba.

The right-hand side is selected by ``mode`` (see ``_kernels``) and evaluated
as ``rhs(mode, t, y, pv, dy)``; ``pv`` is the float64 parameter vector.  Output is
produced on a user grid through the 4th-order continuous extension, so the
step sequence does not depend on the output grid.
"""

import numpy as np
from numba import njit

from ._kernels import rhs

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (-71 / 57600, 71 / 16695, -71 / 1920, 17253 / 339200,
                          -22 / 525, 1 / 40)

# Shampine's dense-output coefficients, rows = stages, columns = theta^1..theta^4.
DENSE = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

OK, STEP_UNDERFLOW, MAX_STEPS = 0, 1, 2


@njit(cache=True)
def _rms(v):
    return np.sqrt(np.mean(v * v))


@njit(cache=True)
def _initial_step(mode, t0, y0, f0, pv, rtol, atol, direction):
    scale = atol + np.abs(y0) * rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = np.empty_like(y0)
    rhs(mode, t0 + h0 * direction, y1, pv, f1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


@njit(cache=True)
def dopri5(mode, t0, y0, t_eval, pv, rtol, atol, h0, max_steps):
    """Integrate from ``t0`` up to ``t_eval[-1]`` (``t_eval`` ascending, >= t0).

    Returns ``(ys, n_out, status, t_reached, n_steps, n_rejected)``; rows of
    ``ys`` beyond ``n_out`` are undefined when ``status != OK``.
    """
    n = y0.size
    m = t_eval.size
    ys = np.empty((m, n))
    t = t0
    y = y0.copy()
    t_end = t_eval[m - 1] if m > 0 else t0
    j = 0
    while j < m and t_eval[j] <= t:
        ys[j] = y
        j += 1
    if j == m:
        return ys, j, OK, t, 0, 0

    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    ytmp = np.empty(n)
    ynew = np.empty(n)
    rhs(mode, t, y, pv, k1)

    h = h0 if h0 > 0 else _initial_step(mode, t, y, k1, pv, rtol, atol, 1.0)
    n_steps = 0
    n_rej = 0
    rejected = False
    while j < m:
        if n_steps >= max_steps:
            return ys, j, MAX_STEPS, t, n_steps, n_rej
        h_min = 10.0 * np.abs(np.nextafter(t, np.inf) - t)
        if h < h_min:
            return ys, j, STEP_UNDERFLOW, t, n_steps, n_rej
        if t + h > t_end:
            h = t_end - t

        ytmp[:] = y + h * (A21 * k1)
        rhs(mode, t + C2 * h, ytmp, pv, k2)
        ytmp[:] = y + h * (A31 * k1 + A32 * k2)
        rhs(mode, t + C3 * h, ytmp, pv, k3)
        ytmp[:] = y + h * (A41 * k1 + A42 * k2 + A43 * k3)
        rhs(mode, t + C4 * h, ytmp, pv, k4)
        ytmp[:] = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)
        rhs(mode, t + C5 * h, ytmp, pv, k5)
        ytmp[:] = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)
        rhs(mode, t + h, ytmp, pv, k6)
        ynew[:] = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        rhs(mode, t + h, ynew, pv, k7)

        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = _rms(err_vec / scale)

        if err <= 1.0:
            t_new = t + h
            while j < m and t_eval[j] <= t_new:
                theta = (t_eval[j] - t) / h
                th1 = theta
                th2 = th1 * theta
                th3 = th2 * theta
                th4 = th3 * theta
                for i in range(n):
                    q = 0.0
                    ks = (k1[i], k2[i], k3[i], k4[i], k5[i], k6[i], k7[i])
                    for s in range(7):
                        q += ks[s] * (DENSE[s, 0] * th1 + DENSE[s, 1] * th2
                                      + DENSE[s, 2] * th3 + DENSE[s, 3] * th4)
                    ys[j, i] = y[i] + h * q
                j += 1
            t = t_new
            y[:] = ynew
            k1[:] = k7
            n_steps += 1
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * err ** -0.2)
            if rejected:
                factor = min(1.0, factor)
            rejected = False
            h *= factor
        else:
            n_rej += 1
            rejected = True
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
    return ys, j, OK, t, n_steps, n_rej
