import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import series
from seaper.errors import DataError, ParameterError
from seaper.gph import gph_estimate, gph_from_log_ordinates, gph_pole_search, gph_rss, gph_weights
from seaper.spectral import GarmaParams


def test_weights_by_hand_m2():
    w = gph_weights(64, 2)
    g = -np.log(2 * np.sin(np.pi * np.array([1, 2]) / 64))
    gc = g - g.mean()
    s2 = 2 * np.sum(gc**2)
    np.testing.assert_allclose(w.g, g, rtol=1e-15)
    assert w.s2 == pytest.approx(s2, rel=1e-14)
    np.testing.assert_allclose(w.a, np.r_[gc[::-1], gc] / (2 * s2), rtol=1e-14)


@given(st.sampled_from([64, 256, 1024, 4096]), st.integers(2, 15))
def test_weight_identities(n, m):
    w = gph_weights(n, m)
    assert abs(np.sum(w.a)) < 1e-12
    g2 = np.r_[w.g[::-1], w.g]
    assert np.dot(w.a, 2 * g2) == pytest.approx(1.0, rel=1e-10)
    np.testing.assert_array_equal(w.a[:m], w.a[m:][::-1])


def test_regressor_at_half_frequency():
    # g at k = N/2 would be -log 2; the largest admissible k stays above it
    w = gph_weights(64, 15)
    assert np.all(w.g > -math.log(2.0))


def test_bandwidth_validation():
    for m in (0, 16, 20):
        with pytest.raises(ParameterError):
            gph_weights(64, m)


@settings(max_examples=25)
@given(st.floats(0.0, 0.49), st.floats(-5, 5))
def test_exact_line_recovered(delta, c):
    n, m = 4096, 256
    w = gph_weights(n, m)
    log_i = 2 * delta * np.r_[w.g[::-1], w.g] + c
    assert gph_from_log_ordinates(log_i, n) == pytest.approx(delta, abs=1e-10)


def test_power_law_line_recovered():
    n, m, delta = 4096, 256, 0.3
    k = np.r_[np.arange(-m, 0), np.arange(1, m + 1)]
    log_i = -2 * delta * np.log(np.abs(k) / n)
    assert abs(gph_from_log_ordinates(log_i, n) - delta) <= 0.02


def test_scale_invariance(rng):
    x = rng.standard_normal(1024)
    assert gph_estimate(5.0 * x, 0.2) == pytest.approx(gph_estimate(x, 0.2), abs=1e-10)


def test_log_ordinates_require_even_length():
    with pytest.raises(ParameterError):
        gph_from_log_ordinates(np.zeros(5), 64)


def test_zero_ordinate_reports_offset():
    with pytest.raises(DataError, match="offset k=-16"):
        gph_estimate(np.ones(256), 0.125, m=16)


def test_white_noise_mean_near_zero():
    est = [gph_estimate(np.random.default_rng(r).standard_normal(1024), 0.2) for r in range(100)]
    assert abs(np.mean(est)) < 4 * np.std(est) / math.sqrt(100)


def test_on_grid_gegenbauer_mean():
    p = GarmaParams(0.25, 0.3)
    est = [gph_estimate(series(p, 1024, seed=9, rep=r), 0.25) for r in range(40)]
    assert np.mean(est) == pytest.approx(0.3, abs=0.05)


def test_pole_search_locates_pole():
    p = GarmaParams(1 / 7, 0.4)
    hits = 0
    for r in range(20):
        f = gph_pole_search(series(p, 2048, seed=21, rep=r), m=64)
        hits += abs(f.xi_hat - p.xi) <= 2 / 2048
        assert 0.0 < f.delta_hat < 0.8
    assert hits >= 17


def test_pole_search_minimizes_rss():
    x = series(GarmaParams(1 / 7, 0.4), 2048, seed=4)
    f = gph_pole_search(x, m=64)
    xc = x - x.mean()
    for dxi in (-0.7, -0.3, 0.3, 0.7):
        assert f.rss <= gph_rss(xc, f.xi_hat + dxi / 2048, 64) + 1e-9
    assert f.delta_hat == pytest.approx(gph_estimate(xc, f.xi_hat, 64), abs=1e-12)


def test_pole_search_explicit_grid():
    x = series(GarmaParams(0.25, 0.35), 1024, seed=6)
    grid = np.arange(250, 263) / 1024
    f = gph_pole_search(x, m=64, xi_grid=grid)
    assert f.rss <= min(gph_rss(x - x.mean(), v, 64) for v in grid) + 1e-9
    assert grid[0] - 1 / 1024 <= f.xi_hat <= grid[-1] + 1 / 1024


def test_pole_search_empty_interval():
    with pytest.raises(ParameterError):
        gph_pole_search(np.random.default_rng(0).standard_normal(256), m=16, xi_min=0.3, xi_max=0.2)
