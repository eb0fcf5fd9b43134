"""Central-difference Jacobian of the mean-field equations in quadrature form."""

import numpy as np

from kerrmagno.stability import mean_field_rhs
from kerrmagno.steady import MeanState

SQRT2 = np.sqrt(2.0)


def to_quad(state):
    z = np.array([state.a_mean, state.m_mean, state.b_mean])
    return np.column_stack([z.real, z.imag]).ravel() * SQRT2


def from_quad(q):
    z = (q[0::2] + 1j * q[1::2]) / SQRT2
    return MeanState(complex(z[0]), complex(z[1]), complex(z[2]))


def rhs_quad(params, q):
    return to_quad(MeanState(*mean_field_rhs(params, from_quad(q))))


def numerical_jacobian(params, state):
    q0 = to_quad(state)
    eps = np.finfo(float).eps ** (1.0 / 3.0)
    J = np.empty((6, 6))
    for j in range(6):
        h = eps * max(abs(q0[j]), 1.0)
        qp, qm = q0.copy(), q0.copy()
        qp[j] += h
        qm[j] -= h
        J[:, j] = (rhs_quad(params, qp) - rhs_quad(params, qm)) / ((qp[j] - qm[j]))
    return J


def entrywise_relative_error(A, J):
    """max |A-J| / max(|A_ij|, 1e-12 ||A||) over entries, zero entries scaled by the row."""
    A, J = np.asarray(A), np.asarray(J)
    row = np.abs(A).max(axis=1, keepdims=True)
    denom = np.maximum(np.abs(A), row)
    return float(np.max(np.abs(A - J) / denom))
