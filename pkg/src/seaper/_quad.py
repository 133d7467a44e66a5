"""Fixed-node quadrature for integrals over the real line with a |u|^(-2 delta) weight.

The integrands handled here are products of squared Dirichlet-like kernels
centred at an integer offset ``j``. They are smooth on each unit panel, have an
algebraic singularity at ``u = 0`` through the weight, and oscillate with a
power-law envelope at infinity.

The line is split into
  * [-1, 1], integrated with Gauss-Jacobi nodes that absorb |u|^(-2 delta),
  * unit panels 1 <= |u| <= L, Gauss-Legendre on each,
  * |u| > L, where the integrand is replaced by its oscillation average
    (sin^2 and cos^2 -> 1/2, sin cos -> 0) and integrated after u = L / t.
Nodes are fixed, so repeated evaluations are bit-identical.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special

N_JACOBI = 48
N_PANEL = 24
N_TAIL = 40
PANEL_MARGIN = 96


@lru_cache(maxsize=None)
def _jacobi(alpha: float):
    # nodes on [0, 1] for weight x^alpha
    x, w = special.roots_jacobi(N_JACOBI, 0.0, alpha)
    return (x + 1.0) / 2.0, w / 2.0 ** (alpha + 1.0)


@lru_cache(maxsize=None)
def _legendre(n: int):
    x, w = special.roots_legendre(n)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=64)
def _panel_nodes(n_panels: int):
    g, gw = _legendre(N_PANEL)
    u = (np.arange(1, n_panels + 1)[:, None] + g[None, :]).ravel()
    w = np.broadcast_to(gw, (n_panels, N_PANEL)).ravel()
    return u, w


def panel_limit(j: float) -> int:
    return int(np.ceil(abs(j))) + PANEL_MARGIN


def weighted_integral(h, h_mean, delta: float, limit: int) -> float:
    """Integral over the real line of |u|^(-2 delta) h(u).

    ``h_mean`` is the oscillation average of ``h`` used beyond ``|u| > limit``.
    """
    x, w = _jacobi(-2.0 * delta)
    total = np.dot(w, h(x) + h(-x))
    u, wu = _panel_nodes(limit - 1)
    total += np.dot(wu, u ** (-2.0 * delta) * (h(u) + h(-u)))
    t, wt = _legendre(N_TAIL)
    ut = limit / t
    total += np.dot(wt, limit / t**2 * ut ** (-2.0 * delta) * (h_mean(ut) + h_mean(-ut)))
    return float(total)


def weighted_pv_integral(g, g_mean, delta: float, limit: int) -> float:
    """Principal value over the real line of |u|^(-2 delta) u^(-1) g(u).

    Folded onto the positive axis as u^(-2 delta - 1) (g(u) - g(-u)).
    """
    x, w = _jacobi(-2.0 * delta)
    total = np.dot(w, (g(x) - g(-x)) / x)
    u, wu = _panel_nodes(limit - 1)
    total += np.dot(wu, u ** (-2.0 * delta - 1.0) * (g(u) - g(-u)))
    t, wt = _legendre(N_TAIL)
    ut = limit / t
    total += np.dot(wt, limit / t**2 * ut ** (-2.0 * delta - 1.0) * (g_mean(ut) - g_mean(-ut)))
    return float(total)
