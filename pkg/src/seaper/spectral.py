"""Gegenbauer-ARMA spectral model, its pole factorization and autocovariances.

Frequencies are in cycles per sample throughout, so the Nyquist frequency is
1/2 and the pole ``xi`` lies in (0, 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import linalg, signal, special

from . import kernels
from .errors import NumericError, ParameterError

__all__ = [
    "GarmaParams",
    "AcvSequence",
    "arma_modulus",
    "sdf",
    "f_dagger",
    "ma_coefficients",
    "acv",
    "fractional_acv",
]


@dataclass(frozen=True)
class GarmaParams:
    """Parameters of a GARMA(p, q) process with p, q <= 1.

    ``delta = 0`` is admitted as a degenerate (ARMA or white noise) case.
    """

    xi: float
    delta: float
    phi: float = 0.0
    theta: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        for name in ("xi", "delta", "phi", "theta", "sigma2"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not 0.0 < self.xi < 0.5:
            raise ParameterError(f"xi must lie in (0, 0.5), got {self.xi}")
        if not 0.0 <= self.delta < 0.5:
            raise ParameterError(f"delta must lie in [0, 0.5), got {self.delta}")
        if not abs(self.phi) < 1.0:
            raise ParameterError(f"|phi| must be < 1, got {self.phi}")
        if not abs(self.theta) < 1.0:
            raise ParameterError(f"|theta| must be < 1, got {self.theta}")
        if not self.sigma2 > 0.0:
            raise ParameterError(f"sigma2 must be > 0, got {self.sigma2}")

    def with_(self, **changes) -> "GarmaParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "delta": self.delta,
            "phi": self.phi,
            "theta": self.theta,
            "sigma2": self.sigma2,
        }


def arma_modulus(params: GarmaParams, lam):
    """Squared modulus of the ARMA(1,1) transfer function at ``lam``."""
    c = np.cos(2.0 * np.pi * np.asarray(lam, dtype=float))
    th, ph = params.theta, params.phi
    return (1.0 + 2.0 * th * c + th * th) / (1.0 - 2.0 * ph * c + ph * ph)


def _pole_factors(xi, lam):
    # |2cos(2 pi lam) - 2cos(2 pi xi)| = |2 sin pi(lam - xi)| * |2 sin pi(lam + xi)|
    lam = np.asarray(lam, dtype=float)
    left = np.abs(2.0 * np.sin(np.pi * (lam - xi)))
    right = np.abs(2.0 * np.sin(np.pi * (lam + xi)))
    return left, right


def sdf(params: GarmaParams, lam):
    """Spectral density; ``+inf`` exactly at ``lam = +-xi`` when delta > 0."""
    lam = np.asarray(lam, dtype=float)
    left, right = _pole_factors(params.xi, lam)
    base = left * right
    h2 = params.sigma2 * arma_modulus(params, lam)
    if params.delta == 0.0:
        out = h2 * np.ones_like(base)
    else:
        with np.errstate(divide="ignore"):
            out = h2 * base ** (-2.0 * params.delta)
    return out[()] if out.ndim == 0 else out


def f_dagger(params: GarmaParams, lam):
    """Spectral density with the pole factor |lam - xi|^(-2 delta) removed.

    At ``lam = xi`` the analytic limit ``sigma2 |h(xi)|^2 / (4 pi sin 2 pi xi)^(2 delta)``
    is returned.
    """
    lam = np.asarray(lam, dtype=float)
    d = params.delta
    h2 = params.sigma2 * arma_modulus(params, lam)
    if d == 0.0:
        out = h2 * np.ones_like(lam)
        return out[()] if out.ndim == 0 else out
    s = lam - params.xi
    left, right = _pole_factors(params.xi, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s == 0.0, 1.0 / (2.0 * np.pi), np.abs(s) / left)
        out = h2 * ratio ** (2.0 * d) * right ** (-2.0 * d)
    return out[()] if out.ndim == 0 else out


def ma_coefficients(params: GarmaParams, n_terms: int) -> np.ndarray:
    """First ``n_terms`` MA(inf) weights of the GARMA filter (sigma2 excluded)."""
    n_terms = int(n_terms)
    if n_terms < 1:
        raise ParameterError("n_terms must be >= 1")
    eta = np.cos(2.0 * np.pi * params.xi)
    c = kernels.gegenbauer_coefficients(eta, params.delta, n_terms)
    # ARMA factor (1 + theta z) / (1 - phi z)
    return signal.lfilter([1.0, params.theta], [1.0, -params.phi], c)


@dataclass(frozen=True)
class AcvSequence:
    """Autocovariances gamma[0..n-1] of a stationary process."""

    gamma: np.ndarray
    n: int

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        if g.shape != (self.n,):
            raise NumericError("acv length does not match n")
        if not g[0] > 0.0:
            raise NumericError("acv at lag 0 must be positive")

    def toeplitz(self, n: int | None = None) -> np.ndarray:
        n = self.n if n is None else n
        return linalg.toeplitz(self.gamma[:n])


def fractional_acv(delta: float, n: int) -> np.ndarray:
    """Autocovariances of |2 sin(pi lam)|^(-2 delta), lags 0..n-1."""
    a = np.empty(n)
    a[0] = np.exp(special.gammaln(1.0 - 2.0 * delta) - 2.0 * special.gammaln(1.0 - delta))
    k = np.arange(1, n)
    a[1:] = a[0] * np.cumprod((k - 1.0 + delta) / (k - delta))
    return a


def _local_taylor(params: GarmaParams, order: int, n_nodes: int = 64) -> np.ndarray:
    """Taylor coefficients at lam = xi of sdf / |2 sin pi(lam - xi)|^(-2 delta).

    Computed by the Cauchy integral on a small circle in the complex plane,
    where the factor is analytic.
    """
    xi, d = params.xi, params.delta
    radius = 0.3 * min(xi, 0.5 - xi)
    ang = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    lam = xi + radius * np.exp(1j * ang)
    e = np.exp(-2j * np.pi * lam)
    einv = 1.0 / e
    h2 = (
        params.sigma2
        * (1.0 + params.theta * e) * (1.0 + params.theta * einv)
        / ((1.0 - params.phi * e) * (1.0 - params.phi * einv))
    )
    g = h2 * (2.0 * np.sin(np.pi * (lam + xi))) ** (-2.0 * d)
    coef = np.fft.fft(g) / n_nodes
    return (coef[: order + 1] / radius ** np.arange(order + 1)).real


def _matching_trig_poly(taylor: np.ndarray) -> tuple[float, np.ndarray]:
    """Real trigonometric polynomial c0 + sum A_m cos(2 pi m s) + B_m sin(2 pi m s)
    whose Taylor expansion at s = 0 matches ``taylor`` (orders 0..4)."""
    tp = 2.0 * np.pi
    even = np.array([[1.0, 1.0, 1.0], [0.0, -tp**2 / 2, -(2 * tp) ** 2 / 2],
                     [0.0, tp**4 / 24, (2 * tp) ** 4 / 24]])
    c0, a1, a2 = np.linalg.solve(even, taylor[[0, 2, 4]])
    odd = np.array([[tp, 2 * tp], [-tp**3 / 6, -(2 * tp) ** 3 / 6]])
    b1, b2 = np.linalg.solve(odd, taylor[[1, 3]])
    # exponential-form coefficients c_m for m = -2..2
    cm = np.array([(a2 + 1j * b2) / 2, (a1 + 1j * b1) / 2, c0, (a1 - 1j * b1) / 2, (a2 - 1j * b2) / 2])
    return c0, cm


@lru_cache(maxsize=64)
def _acv_cached(params: GarmaParams, n: int) -> np.ndarray:
    d = params.delta
    size = max(1 << 17, 1 << int(np.ceil(np.log2(8 * n))))
    lam = (np.arange(size) + 0.5) / size
    f = sdf(params, lam)
    tau = np.arange(n)
    if d > 0.0:
        _, cm = _matching_trig_poly(_local_taylor(params, 4))
        m = np.arange(-2, 3)
        s_plus = lam - params.xi
        s_minus = -lam - params.xi
        trig = lambda s: np.real(np.exp(2j * np.pi * np.outer(s, m)) @ cm)  # noqa: E731
        left, right = _pole_factors(params.xi, lam)
        with np.errstate(divide="ignore"):
            singular = trig(s_plus) * left ** (-2 * d) + trig(s_minus) * right ** (-2 * d)
            resid = f - singular
        resid[~np.isfinite(resid)] = 0.0
        a = fractional_acv(d, n + 3)
        idx = np.abs(tau[:, None] + m[None, :])
        sing_acv = 2.0 * np.real(np.exp(2j * np.pi * params.xi * tau) * (a[idx] @ cm))
    else:
        resid = f
        sing_acv = np.zeros(n)
    spec = np.fft.fft(resid)[:n]
    smooth_acv = np.real(np.exp(-1j * np.pi * tau / size) * spec) / size
    return sing_acv + smooth_acv


def acv(params: GarmaParams, n: int) -> AcvSequence:
    """Autocovariances at lags 0..n-1.

    The two pole singularities are subtracted using shifted fractional-noise
    spectra, whose autocovariances are known in closed form, each multiplied
    by a trigonometric polynomial matching the regular factor to fourth order.
    The smooth remainder is integrated with a fine midpoint rule via the FFT.
    """
    n = int(n)
    if n < 1:
        raise ParameterError("n must be >= 1")
    gamma = _acv_cached(params, n).copy()
    return AcvSequence(gamma=gamma, n=n)
