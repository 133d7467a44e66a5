"""Pure-Python reference implementations of the hot loops.

These mirror the compiled versions in ``_kernels.pyx`` one for one and are
used whenever the extension is not built.
"""

import numpy as np


def gegenbauer_coefficients(eta, delta, n):
    """Coefficients of (1 - 2*eta*z + z**2)**(-delta) up to z**(n-1)."""
    out = np.zeros(n)
    if n == 0:
        return out
    out[0] = 1.0
    if n > 1:
        out[1] = 2.0 * eta * delta
    c2, c1 = out[0], out[1] if n > 1 else 0.0
    for k in range(2, n):
        c = (2.0 * eta * (k + delta - 1.0) * c1 - (k + 2.0 * delta - 2.0) * c2) / k
        out[k] = c
        c2, c1 = c1, c
    return out


def levinson_simulate(gamma, z):
    """Durbin-Levinson innovations filter.

    Maps standard normal innovations ``z`` to a zero-mean Gaussian series with
    autocovariances ``gamma``. Returns ``(x, bad_lag)`` where ``bad_lag`` is -1
    on success or the first lag whose prediction variance is not positive.
    """
    gamma = np.asarray(gamma, dtype=float)
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    x = np.zeros(n)
    v = gamma[0]
    if not v > 0.0:
        return x, 0
    x[0] = np.sqrt(v) * z[0]
    phi = np.zeros(n)
    for t in range(1, n):
        prev = phi[: t - 1]
        k = (gamma[t] - np.dot(prev, gamma[t - 1:0:-1])) / v
        phi[: t - 1] = prev - k * prev[::-1]
        phi[t - 1] = k
        v = v * (1.0 - k * k)
        if not v > 0.0:
            return x, t
        x[t] = np.dot(phi[:t], x[t - 1::-1]) + np.sqrt(v) * z[t]
    return x, -1
