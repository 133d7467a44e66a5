"""Log-periodogram (GPH) regression for delta on the demodulated periodogram."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .demod import _as_series, build_grid, ddft, demod_periodogram
from .errors import DataError, GridError, ParameterError

__all__ = ["GphWeights", "GphFit", "gph_weights", "gph_from_log_ordinates", "gph_estimate", "gph_rss", "gph_pole_search"]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
NEIGHBOURHOOD = 2


@dataclass(frozen=True)
class GphWeights:
    """Regressor g_k = -log|1 - exp(2 pi i k / N)| for k = 1..m and the weights a_k.

    ``a`` holds a_k for k = -m..-1, 1..m (mirrored), scaled so that
    sum_k a_k (2 delta g_k + c) = delta.
    """

    g: np.ndarray
    g_bar: float
    s2: float
    a: np.ndarray
    m: int


def _check_m(n: int, m: int) -> int:
    m = int(m)
    if m < 1:
        raise ParameterError(f"bandwidth m must be >= 1, got {m}")
    if not m < n / 4:
        raise ParameterError(f"bandwidth m must be < n/4, got m={m}, n={n}")
    return m


def gph_weights(n: int, m: int) -> GphWeights:
    m = _check_m(n, m)
    k = np.arange(1, m + 1)
    g = -np.log(np.abs(2.0 * np.sin(np.pi * k / n)))
    g_bar = float(g.mean())
    s2 = 2.0 * float(np.sum((g - g_bar) ** 2))
    half = (g - g_bar) / (2.0 * s2) if s2 > 0 else np.zeros(m)
    a = np.concatenate([half[::-1], half])
    return GphWeights(g=g, g_bar=g_bar, s2=s2, a=a, m=m)


def _side_ordinates(values: np.ndarray, pole: int, m: int) -> np.ndarray:
    lo, hi = pole - m, pole + m
    if lo < 0 or hi >= values.size:
        raise GridError(f"pole grid has fewer than m={m} ordinates on one side")
    return np.concatenate([values[lo:pole], values[pole + 1 : hi + 1]])


def _log_ordinates(x: np.ndarray, xi: float, m: int) -> np.ndarray:
    pg = demod_periodogram(x, xi)
    ords = _side_ordinates(pg.values, pg.grid.pole_position, m)
    if np.any(ords <= 0.0):
        bad = int(np.flatnonzero(ords <= 0.0)[0])
        k = bad - m if bad < m else bad - m + 1
        raise DataError(f"zero periodogram ordinate at offset k={k}; log undefined")
    return np.log(ords)


def gph_from_log_ordinates(log_i, n: int) -> float:
    """Slope estimate from log I at offsets k = -m..-1, 1..m (length 2m)."""
    log_i = np.asarray(log_i, dtype=float)
    if log_i.ndim != 1 or log_i.size % 2:
        raise ParameterError("need log ordinates for k = -m..-1, 1..m")
    w = gph_weights(n, log_i.size // 2)
    return float(np.dot(w.a, log_i))


def gph_estimate(data, xi: float, m: int | None = None) -> float:
    """delta_hat = sum_{1<=|k|<=m} a_k log I(xi + k/N), the pole ordinate excluded."""
    x = _as_series(data)
    n = x.size
    m = n // 8 if m is None else m
    w = gph_weights(n, m)
    return float(np.dot(w.a, _log_ordinates(x, xi, w.m)))


def _rss_from_logs(y: np.ndarray, gm: np.ndarray) -> np.ndarray:
    # OLS of y on (1, g) over the symmetric index set; gm = g - mean(g), mirrored
    yc = y - y.mean(axis=-1, keepdims=True)
    sxx = float(np.sum(gm * gm))
    sxy = yc @ gm
    return np.sum(yc * yc, axis=-1) - sxy * sxy / sxx


def gph_rss(data, xi: float, m: int | None = None) -> float:
    x = _as_series(data)
    n = x.size
    m = n // 8 if m is None else m
    w = gph_weights(n, m)
    gm = np.concatenate([w.g[::-1], w.g]) - w.g_bar
    return float(_rss_from_logs(_log_ordinates(x, xi, w.m), gm))


@dataclass(frozen=True)
class GphFit:
    xi_hat: float
    delta_hat: float
    m: int
    rss: float
    weights: np.ndarray


def gph_pole_search(
    data,
    m: int | None = None,
    xi_min: float | None = None,
    xi_max: float | None = None,
    xi_grid=None,
    neighbourhood: int | None = NEIGHBOURHOOD,
) -> GphFit:
    """Minimize the regression RSS over the pole, then report delta_hat there.

    Coarse scan on a 1/(2N) lattice (or ``xi_grid`` if given), then golden
    section within +-1/N of the best lattice point.

    Windows that miss the pole fit a smooth log-spectrum about as well as the
    window centred on it, so by default the lattice is confined to
    +-``neighbourhood``/N of the largest Fourier ordinate in the search range.
    ``neighbourhood=None`` scans the whole range.
    """
    x = _as_series(data)
    x = x - x.mean()
    n = x.size
    m = n // 8 if m is None else m
    w = gph_weights(n, m)
    gm = np.concatenate([w.g[::-1], w.g]) - w.g_bar
    lo = (m + 1.0) / n if xi_min is None else max(float(xi_min), (m + 1.0) / n)
    hi = 0.5 - (m + 1.0) / n if xi_max is None else min(float(xi_max), 0.5 - (m + 1.0) / n)
    if not lo <= hi:
        raise ParameterError(f"pole search interval empty for n={n}, m={m}")

    if xi_grid is None:
        m_vals = np.arange(math.ceil(2 * n * lo - 1e-9), math.floor(2 * n * hi + 1e-9) + 1)
        if m_vals.size == 0:
            raise ParameterError("pole search interval contains no lattice point")
        half = n // 2
        if neighbourhood is not None:
            pg = np.abs(np.fft.rfft(x)[:half]) ** 2
            j_lo, j_hi = max(1, math.ceil(n * lo)), min(half - 1, math.floor(n * hi))
            if j_lo <= j_hi:
                peak = j_lo + int(np.argmax(pg[j_lo : j_hi + 1]))
                keep = np.abs(m_vals - 2 * peak) <= 2 * int(neighbourhood)
                if np.any(keep):
                    m_vals = m_vals[keep]
        per = [np.abs(ddft(x, 0.0)[:half]) ** 2, np.abs(ddft(x, 0.5 / n)[:half]) ** 2]
        with np.errstate(divide="ignore"):
            logs = [np.log(p) for p in per]
        k = np.concatenate([np.arange(-m, 0), np.arange(1, m + 1)])
        j0 = m_vals // 2
        y = np.where((m_vals % 2 == 0)[:, None], logs[0][j0[:, None] + k], logs[1][j0[:, None] + k])
        rss = _rss_from_logs(y, gm)
        rss = np.where(np.isfinite(rss), rss, np.inf)
        grid = m_vals / (2.0 * n)
    else:
        grid = np.asarray(xi_grid, dtype=float)
        rss = np.array([_safe_rss(x, v, m, gm) for v in grid])
    i = int(np.argmin(rss))
    if not np.isfinite(rss[i]):
        raise DataError("every candidate pole has a zero periodogram ordinate")
    best_xi, best_rss = float(grid[i]), float(rss[i])

    a, b = max(lo, best_xi - 1.0 / n), min(hi, best_xi + 1.0 / n)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = _safe_rss(x, c, m, gm), _safe_rss(x, d, m, gm)
    seen = [(fc, c), (fd, d)]
    for _ in range(30):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _safe_rss(x, c, m, gm)
            seen.append((fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _safe_rss(x, d, m, gm)
            seen.append((fd, d))
    r2, xi2 = min(seen)
    if r2 < best_rss:
        best_xi, best_rss = xi2, r2
    delta = float(np.dot(w.a, _log_ordinates(x, best_xi, w.m)))
    return GphFit(xi_hat=best_xi, delta_hat=delta, m=w.m, rss=best_rss, weights=w.a)


def _safe_rss(x, xi, m, gm) -> float:
    try:
        build_grid(xi, x.size)
        return float(_rss_from_logs(_log_ordinates(x, xi, m), gm))
    except (GridError, DataError):
        return math.inf
