"""Bias and variance constants of the pole-aligned periodogram.

Ordinates are indexed by their integer offset ``j`` from the pole. For each
``j`` the expectation of the standardized periodogram and of its first two
frequency derivatives reduce to one-dimensional integrals over the real line
with a |u|^(-2 delta) weight. Those integrals feed the finite-sample normal
approximations (mu2, sigma1^2, sigma2^2) used for the pole confidence interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from . import _quad
from .errors import NumericError, ParameterError

__all__ = [
    "FiniteSampleConstants",
    "OrdinateConstants",
    "b_pole",
    "b_pole_quadrature",
    "relative_bias_offpole",
    "dot_b",
    "ddot_b",
    "dot_c",
    "sigma_tilde_sq",
    "ordinate_constants",
    "finite_sample_constants",
    "c1_pdf",
    "c1_quantile",
    "ci_half_width",
    "ASYMPTOTIC_SIGMA1_SQ",
    "ASYMPTOTIC_SIGMA2_SQ",
    "ASYMPTOTIC_N",
    "EXACT_J_MAX",
]

PI = math.pi
ASYMPTOTIC_SIGMA1_SQ = PI**2 / 3.0
ASYMPTOTIC_SIGMA2_SQ = 8.0 * PI**4 / 15.0
DOT_C_LIMIT = 2.0 * PI**2 / 3.0
SIGMA_TILDE_LIMIT = 16.0 * PI**4 / 15.0
ASYMPTOTIC_N = 2**20
# ordinates beyond this offset use closed-form large-|j| behaviour
EXACT_J_MAX = 200
TABLE_XI = 1.0 / 7.0


def _check_delta(delta: float, allow_zero: bool = False) -> float:
    delta = float(delta)
    lo_ok = delta >= 0.0 if allow_zero else delta > 0.0
    if not (lo_ok and delta < 0.5):
        raise ParameterError(f"delta must lie in {'[0' if allow_zero else '(0'}, 0.5), got {delta}")
    return delta


def b_pole(delta: float) -> float:
    """Asymptotic relative bias of the periodogram ordinate sitting on the pole."""
    delta = _check_delta(delta, allow_zero=True)
    if delta == 0.0:
        return 1.0
    # Gamma(-1-2d) through the reflection formula
    z = -1.0 - 2.0 * delta
    gamma_z = PI / (math.sin(PI * z) * special.gamma(1.0 - z))
    return -gamma_z * math.cos(PI * (0.5 + delta)) * 2.0 ** (2 * delta + 1) * PI ** (2 * delta - 1)


def b_pole_quadrature(delta: float) -> float:
    """b_pole evaluated as the integral of |u|^(-2 delta) sinc^2(u) over the line."""
    delta = _check_delta(delta, allow_zero=True)
    return _quad.weighted_integral(_sinc2(0.0), _sinc2_mean(0.0), delta, 4096)


# ---------------------------------------------------------------- integrands


def _q(x):
    # (sin x - x cos x) / x^3, smooth and even
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-2
    xs = x[~small]
    out[~small] = (np.sin(xs) - xs * np.cos(xs)) / xs**3
    x2 = x[small] ** 2
    out[small] = 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0
    return out


def _sinc2(j):
    return lambda u: np.sinc(u - j) ** 2


def _sinc2_mean(j):
    return lambda u: 0.5 / (PI * (u - j)) ** 2


def _sinc2_over_u(j):
    # sinc^2(u - j) / u, rewritten away from u = j to avoid 0/0 at u = 0
    def h(u):
        out = np.empty_like(u)
        near = np.abs(u - j) < np.abs(u)
        out[near] = np.sinc(u[near] - j) ** 2 / u[near]
        far = ~near
        out[far] = u[far] * np.sinc(u[far]) ** 2 / (u[far] - j) ** 2
        return out

    return h


def _sinc2_over_u2(j):
    def h(u):
        out = np.empty_like(u)
        near = np.abs(u - j) < np.abs(u)
        out[near] = np.sinc(u[near] - j) ** 2 / u[near] ** 2
        far = ~near
        out[far] = np.sinc(u[far]) ** 2 / (u[far] - j) ** 2
        return out

    return h


def _cdot_kernel(j):
    return lambda u: 2.0 * PI**2 * (PI * (j - u)) ** 2 * _q(PI * (j - u)) ** 2


def _cdot_kernel_mean(j):
    def h(u):
        x2 = (PI * (j - u)) ** 2
        return PI**2 * (1.0 + x2) / x2**2

    return h


@dataclass(frozen=True)
class OrdinateConstants:
    """Per-ordinate constants at offset ``j`` from the pole.

    ``b`` relative bias; ``b_dot``, ``b_ddot`` first and second frequency
    derivative biases; ``c_dot`` variance of the derivative periodogram;
    ``c_ddot`` and ``c_ddot_pv`` the two auxiliary integrals entering the
    second-derivative variance.
    """

    j: int
    delta: float
    b: float
    b_dot: float
    b_ddot: float
    c_dot: float
    c_ddot: float
    c_ddot_pv: float


@lru_cache(maxsize=8192)
def _nonneg_ordinate(j: int, delta: float) -> OrdinateConstants:
    limit = _quad.panel_limit(j)
    w = _quad.weighted_integral
    scale = float(j) ** (2.0 * delta) if j else 1.0

    b = scale * w(_sinc2(j), _sinc2_mean(j), delta, limit)
    c_dot = scale * w(_cdot_kernel(j), _cdot_kernel_mean(j), delta, limit)

    def psi2(u):
        return 2.0 * _q(PI * (u - j))

    a1 = scale * w(
        lambda u: np.sinc(u - j) * psi2(u),
        lambda u: 1.0 / (PI * (u - j)) ** 4,
        delta,
        limit,
    )
    a2 = scale * w(
        lambda u: psi2(u) ** 2,
        lambda u: 2.0 * (1.0 + (PI * (u - j)) ** 2) / (PI * (u - j)) ** 6,
        delta,
        limit,
    )
    c_ddot = (b - 2.0 * a1 + a2) / 16.0

    if j == 0:
        # the pole ordinate: no first-derivative bias, second-derivative bias
        # from the Dirichlet-kernel derivative integral, rescaled by b_pole
        def k(u):
            x = PI * u
            out = np.empty_like(u)
            small = np.abs(x) < 1e-2
            xs, us = x[~small], u[~small]
            out[~small] = (np.sin(xs) * np.cos(xs) / xs**2 - np.sin(xs) ** 2 / xs**3) / us
            out[small] = PI * (-1.0 / 3.0 + 4.0 * x[small] ** 2 / 45.0)
            return out

        t = w(k, lambda u: -0.5 / ((PI * u) ** 3 * u), delta, limit)
        return OrdinateConstants(0, delta, b, 0.0, -4.0 * PI * delta * t / b, c_dot, c_ddot, 0.0)

    b_dot = -2.0 * delta * scale * w(
        _sinc2_over_u(j), lambda u: 0.5 / ((PI * (u - j)) ** 2 * u), delta, limit
    )
    b_ddot = 2.0 * delta * (2.0 * delta + 1.0) * scale * w(
        _sinc2_over_u2(j), lambda u: 0.5 / ((PI * (u - j)) ** 2 * u**2), delta, limit
    )
    c_ddot_pv = scale * _quad.weighted_pv_integral(
        lambda s: 0.5 * (PI * (j - s)) ** 2 * _q(PI * (j - s)) ** 2,
        lambda s: 0.25 * (1.0 + (PI * (j - s)) ** 2) / (PI * (j - s)) ** 4,
        delta,
        limit,
    )
    out = OrdinateConstants(j, delta, b, b_dot, b_ddot, c_dot, c_ddot, c_ddot_pv)
    if not all(math.isfinite(v) for v in (b, b_dot, b_ddot, c_dot, c_ddot, c_ddot_pv)):
        raise NumericError(f"non-finite ordinate constants at j={j}, delta={delta}")
    return out


def _quantize(delta: float) -> float:
    return round(float(delta), 6)


def ordinate_constants(j: int, delta: float) -> OrdinateConstants:
    """All per-ordinate constants at integer offset ``j``.

    Negative offsets are mapped from ``|j|``: b, b_ddot, c_dot, c_ddot are even
    in ``j`` while b_dot and c_ddot_pv are odd.
    """
    delta = _quantize(_check_delta(delta))
    j = int(j)
    base = _nonneg_ordinate(abs(j), delta)
    if j >= 0:
        return base
    return OrdinateConstants(
        j, delta, base.b, -base.b_dot, base.b_ddot, base.c_dot, base.c_ddot, -base.c_ddot_pv
    )


def relative_bias_offpole(c: float, delta: float) -> float:
    """Relative bias of the periodogram at offset ``c`` (in Fourier units) from the pole.

    Evaluates |c|^(2 delta) times the integral of |u|^(-2 delta) sinc^2(u - c).
    """
    delta = _check_delta(delta, allow_zero=True)
    c = float(c)
    if c == 0.0:
        raise ParameterError("offset c must be non-zero")
    if delta == 0.0:
        # the Fejer kernel integrates to one
        return 1.0
    val = _quad.weighted_integral(_sinc2(c), _sinc2_mean(c), delta, _quad.panel_limit(c))
    return abs(c) ** (2.0 * delta) * val


def dot_b(j: int, delta: float) -> float:
    if int(j) == 0:
        raise ParameterError("dot_b is defined for j != 0")
    return ordinate_constants(j, delta).b_dot


def ddot_b(j: int, delta: float) -> float:
    return ordinate_constants(j, delta).b_ddot


def dot_c(j: int, delta: float) -> float:
    return ordinate_constants(j, delta).c_dot


def _sigma_tilde_from(oc: OrdinateConstants) -> float:
    b, bd, bdd, cd = oc.b, oc.b_dot, oc.b_ddot, oc.c_dot
    p2, p4 = PI**2, PI**4
    var_d2 = (2 * p2 * b + cd) ** 2 / (2**7 * p4)
    var_ae = 0.25 * b * (b / 16 - bdd / (16 * p2) + 3 * cd / (16 * p2) + oc.c_ddot) + (
        -2 * p2 * b - cd + bdd
    ) ** 2 / (2**8 * p4)
    cov_d2_ae = -bd / (2**5 * p2) * (bd / 2 + oc.c_ddot_pv)
    cov_c2_ae = b / (2**6 * p2) * (2 * p2 * b - bdd + 3 * cd)
    cov_ae_bf = oc.delta * bd
    return 2**6 * p4 * (2 * var_d2 + 2 * var_ae - 4 * cov_d2_ae - 4 * cov_c2_ae + 2 * cov_ae_bf)


def sigma_tilde_sq(j: int, delta: float) -> float:
    """Variance of the standardized second-derivative periodogram at offset ``j``."""
    return _sigma_tilde_from(ordinate_constants(j, delta))


# ------------------------------------------------------------ aggregated sums


@dataclass(frozen=True)
class FiniteSampleConstants:
    n: int
    delta: float
    mu2: float
    sigma1_sq: float
    sigma2_sq: float

    def half_width(self, alpha: float = 0.05) -> float:
        """Upper quantile c of the ratio law; the pole CI is xi_hat +- c / n."""
        return c1_quantile(1.0 - alpha / 2.0, self.mu2, self.sigma1_sq, self.sigma2_sq)


def _index_range(n: int, xi: float) -> tuple[int, int]:
    j0 = math.floor(n * xi + 0.5)
    if n * xi - math.floor(n * xi) == 0.5:
        j0 = math.floor(n * xi)  # half toward zero
    return 1 - j0, n // 2 - 1 - j0


def _standardized(oc: OrdinateConstants) -> OrdinateConstants:
    # the pole ordinate enters the likelihood divided by b_pole; its
    # second-moment constants scale by 1 / b_pole accordingly
    if oc.j != 0:
        return oc
    inv = 1.0 / oc.b
    return OrdinateConstants(0, oc.delta, 1.0, 0.0, oc.b_ddot, oc.c_dot * inv, oc.c_ddot * inv, 0.0)


def _b_ddot_tail(js: np.ndarray, delta: float) -> float:
    a = np.abs(js).astype(float)
    return float(
        np.sum(2 * delta * (2 * delta + 1) * (a**-2.0 + b_pole(delta) * a ** (2 * delta - 2)))
    )


@lru_cache(maxsize=512)
def _fsc(n: int, delta: float, j1: int, j2: int) -> FiniteSampleConstants:
    js = np.arange(j1, j2 + 1)
    exact = js[(np.abs(js) <= EXACT_J_MAX)]
    tail = js[np.abs(js) > EXACT_J_MAX]
    sum_bdd = _b_ddot_tail(tail, delta)
    sum_s1 = tail.size * DOT_C_LIMIT
    sum_s2 = tail.size * SIGMA_TILDE_LIMIT
    for j in exact:
        oc = _standardized(ordinate_constants(int(j), delta))
        sum_bdd += oc.b_ddot
        sum_s1 += 0.5 * delta**2 * oc.b_dot**2 + oc.b * oc.c_dot
        sum_s2 += _sigma_tilde_from(oc)
    out = FiniteSampleConstants(
        n=n,
        delta=delta,
        mu2=sum_bdd / math.sqrt(n),
        sigma1_sq=sum_s1 / n,
        sigma2_sq=sum_s2 / n,
    )
    if not (out.sigma1_sq > 0 and out.sigma2_sq > 0):
        raise NumericError(f"non-positive variance constants at n={n}, delta={delta}")
    return out


def finite_sample_constants(n: int, delta: float, xi: float | None = None) -> FiniteSampleConstants:
    """(mu2, sigma1^2, sigma2^2) for a pole-aligned grid of size ``n``.

    Without ``xi`` the ordinate range of a pole at 1/7 is used, matching the
    design the reference values were tabulated for.
    """
    n = int(n)
    if n < 64 or n % 2:
        raise ParameterError(f"n must be even and >= 64, got {n}")
    delta = _quantize(_check_delta(delta))
    j1, j2 = _index_range(n, TABLE_XI if xi is None else float(xi))
    if j1 > 0 or j2 < 0:
        raise ParameterError("pole too close to the band edge for this n")
    return _fsc(n, delta, j1, j2)


# ------------------------------------------------------------ ratio law


def c1_pdf(c, mu2: float, sigma1_sq: float, sigma2_sq: float):
    """Density of C1 = K / W with K ~ N(0, s1^2), W ~ N(mu2, s2^2) independent."""
    c = np.asarray(c, dtype=float)
    s1, s2 = math.sqrt(sigma1_sq), math.sqrt(sigma2_sq)
    u = sigma1_sq + c**2 * sigma2_sq
    term1 = math.sqrt(2.0) * np.sqrt(u) * s1 * s2 / math.sqrt(PI) * math.exp(-(mu2**2) / (2 * sigma2_sq))
    term2 = (
        sigma1_sq
        * mu2
        * np.exp(-(mu2**2) * c**2 / (2 * u))
        * special.erf(mu2 * s1 / (math.sqrt(2.0) * s2 * np.sqrt(u)))
    )
    return u**-1.5 * (term1 + term2) / math.sqrt(2.0 * PI)


def c1_quantile(p: float, mu2: float, sigma1_sq: float, sigma2_sq: float) -> float:
    """Quantile of the (symmetric) C1 law by integrating its density."""
    if not 0.0 < p < 1.0:
        raise ParameterError("p must lie in (0, 1)")
    if p == 0.5:
        return 0.0
    upper = p > 0.5
    target = 1.0 - p if upper else p

    def tail(c):
        val, _ = integrate.quad(c1_pdf, c, np.inf, args=(mu2, sigma1_sq, sigma2_sq), epsabs=1e-12)
        return val - target

    try:
        hi = 1.0
        while tail(hi) > 0:
            hi *= 2.0
            if hi > 1e8:
                raise NumericError("C1 quantile bracket failed")
        c = optimize.brentq(tail, 0.0, hi, xtol=1e-10)
    except (ValueError, RuntimeError) as exc:
        raise NumericError(f"C1 quantile inversion failed: {exc}") from exc
    return c if upper else -c


def ci_half_width(n: int | None, delta: float, alpha: float = 0.05, xi: float | None = None) -> float:
    """Half-width, in units of 1/n, of the finite-sample pole interval.

    ``n=None`` gives the large-sample limit, a scaled Cauchy quantile.
    """
    if n is None:
        return c1_quantile(1.0 - alpha / 2.0, 0.0, ASYMPTOTIC_SIGMA1_SQ, ASYMPTOTIC_SIGMA2_SQ)
    return finite_sample_constants(n, delta, xi).half_width(alpha)
