"""Pole-aligned frequency grids and the demodulated periodogram."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, GridError, ParameterError

__all__ = ["DemodGrid", "DemodPeriodogram", "dft", "build_grid", "ddft", "demod_periodogram"]


def _as_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError("series must be one-dimensional")
    n = x.size
    if n < 4 or n % 2:
        raise DataError(f"series length must be even and >= 4, got {n}")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    return x


def dft(x) -> np.ndarray:
    """Z(j/N) = N^(-1/2) sum_t x_t exp(-2 pi i t j / N) for j = 0..N/2."""
    x = _as_series(x)
    return np.fft.rfft(x) / math.sqrt(x.size)


def nearest_index(xi: float, n: int) -> int:
    """Nearest integer to n * xi; exact half-integers round toward zero."""
    v = n * xi
    lo = math.floor(v)
    return lo if v - lo <= 0.5 else lo + 1


@dataclass(frozen=True)
class DemodGrid:
    """Frequencies xi + k / n for k = j1..j2, one of which sits on xi."""

    xi: float
    n: int
    j0: int
    lambda_d: float
    j1: int
    j2: int

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.j1, self.j2 + 1)

    @property
    def lambdas(self) -> np.ndarray:
        return self.xi + self.offsets / self.n

    @property
    def count(self) -> int:
        return self.j2 - self.j1 + 1

    @property
    def pole_position(self) -> int:
        """Array position of the k = 0 ordinate."""
        return -self.j1


def build_grid(xi: float, n: int) -> DemodGrid:
    xi = float(xi)
    n = int(n)
    if not 0.0 < xi < 0.5:
        raise ParameterError(f"xi must lie in (0, 0.5), got {xi}")
    if n < 4 or n % 2:
        raise ParameterError(f"n must be even and >= 4, got {n}")
    j0 = nearest_index(xi, n)
    j1 = 1 - j0
    j2 = n // 2 - 1 - j0
    if j1 > 0 or j2 < 0:
        raise GridError(f"xi={xi} too close to 0 or 1/2 for n={n}: grid has no pole ordinate")
    return DemodGrid(xi=xi, n=n, j0=j0, lambda_d=xi - j0 / n, j1=j1, j2=j2)


def ddft(x, lam: float) -> np.ndarray:
    """DFT of x_t exp(-2 pi i lam t), at Fourier indices j = 0..N-1."""
    x = _as_series(x)
    n = x.size
    if lam == 0.0:
        return np.fft.fft(x) / math.sqrt(n)
    t = np.arange(n)
    y = x * np.exp(-2j * np.pi * lam * t)
    return np.fft.fft(y) / math.sqrt(n)


@dataclass(frozen=True)
class DemodPeriodogram:
    grid: DemodGrid
    values: np.ndarray
    ddft_re: np.ndarray
    ddft_im: np.ndarray


def demod_periodogram(x, xi: float, center: bool = True) -> DemodPeriodogram:
    """|Z(xi + k/N)|^2 on the pole-aligned grid, from the mean-centred series."""
    x = _as_series(x)
    if center:
        x = x - x.mean()
    grid = build_grid(xi, x.size)
    z = ddft(x, grid.lambda_d)[grid.j0 + grid.j1 : grid.j0 + grid.j2 + 1]
    re, im = z.real.copy(), z.imag.copy()
    return DemodPeriodogram(grid=grid, values=re * re + im * im, ddft_re=re, ddft_im=im)
