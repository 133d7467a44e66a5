# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops; see ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def gegenbauer_coefficients(double eta, double delta, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    if n == 0:
        return out
    o[0] = 1.0
    if n > 1:
        o[1] = 2.0 * eta * delta
    for k in range(2, n):
        o[k] = (2.0 * eta * (k + delta - 1.0) * o[k - 1]
                - (k + 2.0 * delta - 2.0) * o[k - 2]) / k
    return out


def levinson_simulate(gamma_in, z_in):
    cdef const double[::1] gamma = np.ascontiguousarray(gamma_in, dtype=np.float64)
    cdef const double[::1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] phi = np.zeros(n)
    cdef double[::1] tmp = np.zeros(n)
    cdef double v = gamma[0], k, acc
    cdef Py_ssize_t t, j
    if not v > 0.0:
        return x_arr, 0
    x[0] = sqrt(v) * z[0]
    for t in range(1, n):
        acc = gamma[t]
        for j in range(t - 1):
            acc -= phi[j] * gamma[t - 1 - j]
        k = acc / v
        for j in range(t - 1):
            tmp[j] = phi[j] - k * phi[t - 2 - j]
        for j in range(t - 1):
            phi[j] = tmp[j]
        phi[t - 1] = k
        v = v * (1.0 - k * k)
        if not v > 0.0:
            return x_arr, t
        acc = 0.0
        for j in range(t):
            acc += phi[j] * x[t - 1 - j]
        x[t] = acc + sqrt(v) * z[t]
    return x_arr, -1
