"""Demodulated and classic Whittle log-likelihoods, plus exact small-N oracles."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, special

from .constants import b_pole
from .demod import DemodGrid, _as_series, demod_periodogram
from .errors import DataError, EstimationError, NumericError, ParameterError
from .spectral import GarmaParams, acv, arma_modulus, f_dagger

__all__ = [
    "LoglikValue",
    "ProfileResult",
    "log_b_pole",
    "dlog_b_pole",
    "eta_weights",
    "demod_loglik",
    "sigma2_profile",
    "whittle_loglik",
    "exact_time_loglik",
    "dft_exact_loglik",
    "delta_score",
    "delta_information",
    "DemodObjective",
    "WhittleObjective",
    "profile_loglik_xi",
    "DELTA_BOUNDS",
    "ARMA_BOUND",
]

DELTA_BOUNDS = (1e-4, 0.5 - 1e-4)
ARMA_BOUND = 1.0 - 1e-4
EXACT_TIME_MAX_N = 512
DFT_EXACT_MAX_N = 256


@dataclass(frozen=True)
class LoglikValue:
    value: float
    n_ordinates: int
    sigma2_profiled: float | None = None


def log_b_pole(delta):
    """log b_pole, vectorized over delta in (0, 1/2)."""
    d = np.asarray(delta, dtype=float)
    # Gamma(z) sin(pi d) > 0 on this range; reflection keeps the argument positive
    with np.errstate(divide="ignore"):
        return _log_b_pole(d)


def _log_b_pole(d):
    z = -1.0 - 2.0 * d
    log_abs_gamma = math.log(math.pi) - np.log(np.abs(np.sin(np.pi * z))) - special.gammaln(1.0 - z)
    out = log_abs_gamma + np.log(np.sin(np.pi * d)) + (2 * d + 1) * math.log(2.0) + (2 * d - 1) * math.log(math.pi)
    return np.where(d == 0.0, 0.0, out)[()]


def dlog_b_pole(delta):
    d = np.asarray(delta, dtype=float)
    return (-2.0 * special.digamma(-1.0 - 2.0 * d) + math.pi / np.tan(math.pi * d)
            + 2.0 * math.log(2.0) + 2.0 * math.log(math.pi))[()]


def eta_weights(params: GarmaParams, grid: DemodGrid) -> np.ndarray:
    """Precision weights of the pole-aligned ordinates.

    Off the pole ``|j|^(2 delta) / (N^(2 delta) f_dagger)``, on it
    ``1 / (b_pole N^(2 delta) f_dagger(xi))``.
    """
    d = params.delta
    j = grid.offsets
    fd = f_dagger(params, grid.lambdas)
    scale = float(grid.n) ** (2.0 * d)
    absj = np.abs(j).astype(float)
    with np.errstate(divide="ignore"):
        num = np.where(j == 0, 1.0 / b_pole(d), absj ** (2.0 * d))
    return num / (scale * fd)


def demod_loglik(data, params: GarmaParams) -> LoglikValue:
    """sum_j log eta_j - eta_j I(xi + j/N) at the supplied parameters."""
    pg = demod_periodogram(data, params.xi)
    eta = eta_weights(params, pg.grid)
    value = float(np.sum(np.log(eta) - eta * pg.values))
    return LoglikValue(value=value, n_ordinates=pg.grid.count)


def sigma2_profile(data, params: GarmaParams) -> float:
    """Innovation variance maximizing the demodulated likelihood; params.sigma2 is ignored."""
    pg = demod_periodogram(data, params.xi)
    eta = eta_weights(params.with_(sigma2=1.0), pg.grid)
    s2 = float(np.mean(eta * pg.values))
    if not s2 > 0.0:
        raise DataError("all periodogram ordinates are zero; innovation variance is degenerate")
    return s2


def _fourier_sdf_terms(params: GarmaParams, n: int):
    """log f and a usable-ordinate mask at Fourier frequencies j/N, j = 0..N/2."""
    j = np.arange(n // 2 + 1)
    lam = j / n
    on_pole = np.abs(lam - params.xi) < 1e-12
    left = np.abs(2.0 * np.sin(np.pi * (lam - params.xi)))
    right = np.abs(2.0 * np.sin(np.pi * (lam + params.xi)))
    with np.errstate(divide="ignore"):
        logf = (
            math.log(params.sigma2)
            + np.log(arma_modulus(params, lam))
            - 2.0 * params.delta * np.log(left * right)
        )
    mask = ~on_pole & np.isfinite(logf)
    return logf, mask


def whittle_loglik(data, params: GarmaParams, with_log_term: bool = True) -> LoglikValue:
    """Discrete Whittle likelihood -(2/N) sum_j {I_j / f_j [+ log f_j]} over j = 0..N/2.

    Ordinates where the spectral density is infinite are skipped.
    """
    x = _as_series(data)
    x = x - x.mean()
    n = x.size
    per = np.abs(np.fft.rfft(x)) ** 2 / n
    logf, mask = _fourier_sdf_terms(params, n)
    terms = per[mask] * np.exp(-logf[mask])
    if with_log_term:
        terms = terms + logf[mask]
    return LoglikValue(value=float(-2.0 / n * np.sum(terms)), n_ordinates=int(mask.sum()))


# ------------------------------------------------------------------ oracles


def exact_time_loglik(data, params: GarmaParams) -> float:
    """Exact Gaussian log-likelihood of the (zero-mean) series via Cholesky."""
    x = np.asarray(data, dtype=float)
    n = x.size
    if n > EXACT_TIME_MAX_N:
        raise ParameterError(f"exact likelihood limited to n <= {EXACT_TIME_MAX_N}")
    g = acv(params, n).toeplitz()
    try:
        c, low = linalg.cho_factor(g, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError("autocovariance matrix is not positive definite") from exc
    quad = float(x @ linalg.cho_solve((c, low), x))
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    return -0.5 * n * math.log(2 * math.pi) - 0.5 * logdet - 0.5 * quad


def real_dft_matrix(n: int, endpoints: bool = True) -> np.ndarray:
    """Rows map a series to (A_0, A_1, B_1, ..., A_{N/2}) with A - iB = N^(-1/2) DFT."""
    t = np.arange(n)
    rows = []
    if endpoints:
        rows.append(np.ones(n) / math.sqrt(n))
    for j in range(1, n // 2):
        ang = 2.0 * math.pi * j * t / n
        rows.append(np.cos(ang) / math.sqrt(n))
        rows.append(np.sin(ang) / math.sqrt(n))
    if endpoints:
        rows.append((-1.0) ** t / math.sqrt(n))
    return np.array(rows)


def dft_exact_loglik(data, params: GarmaParams, endpoints: bool = True) -> float:
    """Exact Gaussian log-density of the stacked real DFT coefficients.

    The sine rows at frequencies 0 and 1/2 vanish identically and are never
    included; ``endpoints=False`` also drops the two cosine rows there, leaving
    the (A_j, B_j) pairs for 0 < j < N/2.
    """
    x = np.asarray(data, dtype=float)
    n = x.size
    if n > DFT_EXACT_MAX_N:
        raise ParameterError(f"DFT-coefficient likelihood limited to n <= {DFT_EXACT_MAX_N}")
    w = real_dft_matrix(n, endpoints)
    g = acv(params, n).toeplitz()
    cov = w @ g @ w.T
    v = w @ x
    try:
        c = linalg.cho_factor(cov, lower=True)
    except linalg.LinAlgError:
        jitter = 1e-10 * np.trace(cov) / cov.shape[0]
        warnings.warn(f"coefficient covariance regularized with jitter {jitter:.3e}", RuntimeWarning)
        c = linalg.cho_factor(cov + jitter * np.eye(cov.shape[0]), lower=True)
    quad = float(v @ linalg.cho_solve(c, v))
    logdet = 2.0 * float(np.sum(np.log(np.diag(c[0]))))
    return -0.5 * v.size * math.log(2 * math.pi) - 0.5 * logdet - 0.5 * quad


# ------------------------------------------------------- score and information


def _log_eta_delta_derivative(params: GarmaParams, grid: DemodGrid) -> np.ndarray:
    # d/d delta of log eta_j: 2 log(|j| / N) - d log f_dagger / d delta, plus -b'/b on the pole
    lam = grid.lambdas
    j = grid.offsets
    right = np.abs(2.0 * np.sin(np.pi * (lam + params.xi)))
    left = np.abs(2.0 * np.sin(np.pi * (lam - params.xi)))
    n = grid.n
    absj = np.abs(j).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(j == 0, 1.0 / (2.0 * math.pi), absj / n / left)
        dlog_fd = 2.0 * np.log(ratio) - 2.0 * np.log(right)
        r = np.where(j == 0, -2.0 * math.log(n), 2.0 * np.log(absj / n)) - dlog_fd
    r[grid.pole_position] -= dlog_b_pole(params.delta)
    return r


def delta_score(data, params: GarmaParams) -> float:
    """Analytic derivative of the demodulated log-likelihood in delta."""
    pg = demod_periodogram(data, params.xi)
    eta = eta_weights(params, pg.grid)
    r = _log_eta_delta_derivative(params, pg.grid)
    return float(np.sum(r * (1.0 - eta * pg.values)))


def delta_information(params: GarmaParams, n: int) -> float:
    """Fisher information in delta: sum_j (d log eta_j / d delta)^2."""
    from .demod import build_grid

    r = _log_eta_delta_derivative(params, build_grid(params.xi, n))
    return float(np.sum(r * r))


# ------------------------------------------------------- profiled objectives


def _to_open(v, bound):
    # logistic map of the real line onto (-bound, bound)
    return bound * np.tanh(v)


def _from_open(p, bound):
    return np.arctanh(np.clip(p / bound, -1 + 1e-12, 1 - 1e-12))


def _delta_to_open(v):
    lo, hi = DELTA_BOUNDS
    return lo + (hi - lo) * special.expit(v)


def _delta_from_open(d):
    lo, hi = DELTA_BOUNDS
    return special.logit(np.clip((d - lo) / (hi - lo), 1e-12, 1 - 1e-12))


@dataclass(frozen=True)
class ProfileResult:
    value: float
    delta: float
    phi: float
    theta: float
    sigma2: float
    converged: bool = True
    n_evals: int = 0


class _ProfiledObjective:
    """Likelihood in (delta, phi, theta) with sigma2 profiled out in closed form."""

    xi: float
    n: int

    def _log_weights(self, delta: float, phi: float, theta: float) -> np.ndarray:
        raise NotImplementedError

    def values(self) -> np.ndarray:
        raise NotImplementedError

    def profiled(self, delta: float, phi: float = 0.0, theta: float = 0.0) -> tuple[float, float]:
        logw = self._log_weights(delta, phi, theta)
        per = self.values()
        k = per.size
        s2 = float(np.mean(np.exp(logw) * per))
        if not s2 > 0.0:
            raise DataError("all periodogram ordinates are zero")
        return float(np.sum(logw) - k * math.log(s2) - k), s2

    def maximize(self, order: tuple[int, int] = (0, 0), start: tuple[float, float, float] | None = None) -> ProfileResult:
        p, q = order
        counter = {"n": 0}

        def neg_delta_only(d):
            counter["n"] += 1
            return -self.profiled(d)[0]

        res = optimize.minimize_scalar(
            neg_delta_only, bounds=DELTA_BOUNDS, method="bounded", options={"xatol": 1e-7}
        )
        d0 = float(res.x) if start is None else start[0]
        if p == 0 and q == 0:
            val, s2 = self.profiled(float(res.x))
            return ProfileResult(val, float(res.x), 0.0, 0.0, s2, bool(res.success), counter["n"])

        phi0 = 0.0 if start is None else start[1]
        th0 = 0.0 if start is None else start[2]
        x0 = [float(_delta_from_open(d0))]
        if p:
            x0.append(float(_from_open(phi0, ARMA_BOUND)))
        if q:
            x0.append(float(_from_open(th0, ARMA_BOUND)))

        def unpack(v):
            d = float(_delta_to_open(v[0]))
            i = 1
            ph = th = 0.0
            if p:
                ph = float(_to_open(v[i], ARMA_BOUND))
                i += 1
            if q:
                th = float(_to_open(v[i], ARMA_BOUND))
            return d, ph, th

        def neg(v):
            counter["n"] += 1
            try:
                return -self.profiled(*unpack(v))[0]
            except (ParameterError, DataError):
                return np.inf

        best = None
        starts = [np.array(x0)]
        if start is None:
            # a second start guards against the flat ARMA ridge near phi = -theta
            alt = list(x0)
            for i in range(1, len(alt)):
                alt[i] = 0.5 if i == 1 else -0.5
            starts.append(np.array(alt))
        for s in starts:
            r = optimize.minimize(
                neg, s, method="Nelder-Mead",
                options={"xatol": 1e-7, "fatol": 1e-7, "maxiter": 500 * len(s), "adaptive": len(s) > 2},
            )
            if best is None or r.fun < best.fun:
                best = r
        d, ph, th = unpack(best.x)
        val, s2 = self.profiled(d, ph, th)
        if not np.isfinite(val):
            raise EstimationError(f"profile maximization failed at xi={self.xi}")
        return ProfileResult(val, d, ph, th, s2, bool(best.success), counter["n"])


class DemodObjective(_ProfiledObjective):
    """Demodulated likelihood at a fixed pole, periodogram computed once."""

    def __init__(self, data, xi: float):
        pg = demod_periodogram(data, xi)
        self.xi = float(xi)
        self.grid = pg.grid
        self.n = pg.grid.n
        self.periodogram = pg.values
        lam = pg.grid.lambdas
        self._lam = lam
        j = pg.grid.offsets
        self._pole = pg.grid.pole_position
        left = np.abs(2.0 * np.sin(np.pi * (lam - self.xi)))
        right = np.abs(2.0 * np.sin(np.pi * (lam + self.xi)))
        with np.errstate(divide="ignore"):
            logsep = np.log(left * right)
        # on the pole: log(2 pi |2 sin 2 pi xi| / N) from the f_dagger limit
        logsep[self._pole] = math.log(2.0 * math.pi * right[self._pole] / self.n)
        self._logsep = logsep
        self._cos = np.cos(2.0 * np.pi * lam)
        self._offsets = j

    def values(self):
        return self.periodogram

    def _log_weights(self, delta, phi, theta):
        h2 = (1.0 + 2.0 * theta * self._cos + theta * theta) / (1.0 - 2.0 * phi * self._cos + phi * phi)
        logw = 2.0 * delta * self._logsep - np.log(h2)
        logw[self._pole] -= float(log_b_pole(delta))
        return logw


class WhittleObjective(_ProfiledObjective):
    """Discrete Whittle likelihood at Fourier frequencies j/N, j = 0..N/2."""

    def __init__(self, data, xi: float, periodogram: np.ndarray | None = None):
        x = _as_series(data)
        self.xi = float(xi)
        self.n = x.size
        if periodogram is None:
            x = x - x.mean()
            periodogram = np.abs(np.fft.rfft(x)) ** 2 / self.n
        lam = np.arange(self.n // 2 + 1) / self.n
        left = np.abs(2.0 * np.sin(np.pi * (lam - self.xi)))
        right = np.abs(2.0 * np.sin(np.pi * (lam + self.xi)))
        keep = (np.abs(lam - self.xi) >= 1e-12) & (left * right > 0)
        self._per = periodogram[keep]
        self._logsep = np.log(left[keep] * right[keep])
        self._cos = np.cos(2.0 * np.pi * lam[keep])

    def values(self):
        return self._per

    def _log_weights(self, delta, phi, theta):
        h2 = (1.0 + 2.0 * theta * self._cos + theta * theta) / (1.0 - 2.0 * phi * self._cos + phi * phi)
        return 2.0 * delta * self._logsep - np.log(h2)


def make_objective(data, xi: float, method: str = "demodulated") -> _ProfiledObjective:
    if method in ("demodulated", "demod"):
        return DemodObjective(data, xi)
    if method == "whittle":
        return WhittleObjective(data, xi)
    raise ParameterError(f"unknown method {method!r}")


def profile_loglik_xi(data, xi: float, order: tuple[int, int] = (0, 0), method: str = "demodulated") -> ProfileResult:
    """Likelihood maximized over (delta, phi, theta, sigma2) at a fixed pole."""
    return make_objective(data, xi, method).maximize(order)
