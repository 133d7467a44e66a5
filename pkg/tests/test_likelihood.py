import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import series
from seaper import likelihood as L
from seaper.constants import b_pole
from seaper.demod import build_grid, demod_periodogram
from seaper.errors import ParameterError
from seaper.spectral import GarmaParams, sdf


def test_log_b_pole_matches_closed_form():
    for d in (0.05, 0.2, 0.37, 0.49):
        assert L.log_b_pole(d) == pytest.approx(math.log(b_pole(d)), rel=1e-12)
    assert L.log_b_pole(0.0) == 0.0


def test_dlog_b_pole_finite_difference():
    h = 1e-6
    for d in (0.1, 0.3, 0.45):
        fd = (L.log_b_pole(d + h) - L.log_b_pole(d - h)) / (2 * h)
        assert L.dlog_b_pole(d) == pytest.approx(fd, rel=1e-6)


def test_eta_inverts_sdf_off_pole():
    p = GarmaParams(1 / 7, 0.45, 0.3, -0.2, 1.3)
    g = build_grid(p.xi, 1024)
    eta = L.eta_weights(p, g)
    off = g.offsets != 0
    np.testing.assert_allclose(eta[off] * sdf(p, g.lambdas[off]), 1.0, rtol=1e-10)


def test_eta_pole_weight():
    p = GarmaParams(0.25, 0.3)
    g = build_grid(p.xi, 256)
    eta = L.eta_weights(p, g)[g.pole_position]
    fd = (4 * math.pi) ** -0.6
    assert eta == pytest.approx(1.0 / (b_pole(0.3) * 256**0.6 * fd), rel=1e-12)


def test_white_noise_loglik_by_hand(rng):
    x = rng.standard_normal(128)
    p = GarmaParams(0.2, 0.0, sigma2=2.0)
    pg = demod_periodogram(x, p.xi)
    ref = np.sum(-math.log(2.0) - pg.values / 2.0)
    assert L.demod_loglik(x, p).value == pytest.approx(ref, rel=1e-12)


def test_sigma2_profile_is_stationary(gegenbauer_1024):
    p, x = gegenbauer_1024
    s2 = L.sigma2_profile(x, p)
    f = lambda v: L.demod_loglik(x, p.with_(sigma2=v)).value  # noqa: E731
    assert f(s2) > f(s2 * 1.01) and f(s2) > f(s2 * 0.99)
    assert (f(s2 * (1 + 1e-5)) - f(s2 * (1 - 1e-5))) / (2e-5 * s2) == pytest.approx(0.0, abs=1e-3)


def test_profiled_objective_agrees_with_direct(gegenbauer_1024):
    p, x = gegenbauer_1024
    q = p.with_(phi=0.3, theta=-0.2)
    xc = x - x.mean()
    s2 = L.sigma2_profile(xc, q)
    val, s2_obj = L.DemodObjective(xc, q.xi).profiled(q.delta, q.phi, q.theta)
    assert s2_obj == pytest.approx(s2, rel=1e-10)
    assert val == pytest.approx(L.demod_loglik(xc, q.with_(sigma2=s2)).value, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.45), st.floats(0.05, 0.45), st.floats(-0.6, 0.6))
def test_delta_score_matches_central_difference(xi, delta, phi):
    x = series(GarmaParams(1 / 7, 0.3), 256, seed=3)
    p = GarmaParams(xi, delta, phi=phi)
    h = 1e-5
    f = lambda d: L.demod_loglik(x, p.with_(delta=d)).value  # noqa: E731
    fd = (f(delta + h) - f(delta - h)) / (2 * h)
    assert L.delta_score(x, p) == pytest.approx(fd, rel=1e-5, abs=1e-6 * abs(f(delta)))


def test_information_positive_and_growing():
    p = GarmaParams(1 / 7, 0.3)
    vals = [L.delta_information(p, n) for n in (256, 512, 1024, 2048)]
    assert all(v > 0 for v in vals)
    assert np.all(np.diff(vals) > 0)


def test_exact_minus_dft_exact_is_constant(rng):
    x = rng.standard_normal(64)
    diffs = []
    for _ in range(6):
        p = GarmaParams(rng.uniform(0.05, 0.45), rng.uniform(0.05, 0.45), rng.uniform(-0.5, 0.5),
                        rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))
        diffs.append(L.exact_time_loglik(x, p) - L.dft_exact_loglik(x, p))
    assert np.ptp(diffs) < 1e-6


def test_exact_loglik_ar1_closed_form(rng):
    phi, n = 0.6, 50
    x = rng.standard_normal(n)
    p = GarmaParams(0.2, 0.0, phi=phi)
    resid = x[1:] - phi * x[:-1]
    ref = (-0.5 * n * math.log(2 * math.pi) + 0.5 * math.log(1 - phi**2)
           - 0.5 * (x[0] ** 2 * (1 - phi**2) + np.sum(resid**2)))
    assert L.exact_time_loglik(x, p) == pytest.approx(ref, rel=1e-10)


def test_oracles_reject_large_n():
    with pytest.raises(ParameterError):
        L.exact_time_loglik(np.zeros(1024), GarmaParams(0.2, 0.1))
    with pytest.raises(ParameterError):
        L.dft_exact_loglik(np.zeros(512), GarmaParams(0.2, 0.1))


def test_real_dft_matrix_rows_orthogonal():
    # interior cos/sin rows carry half the norm of the endpoint rows
    w = L.real_dft_matrix(16)
    np.testing.assert_allclose(w @ w.T, np.diag(np.r_[1.0, np.full(14, 0.5), 1.0]), atol=1e-13)
    assert L.real_dft_matrix(16, endpoints=False).shape == (14, 16)


def test_profile_bounded_by_pole_rescaling():
    # without the b_pole N^(2 delta) rescaling the pole ordinate would drive delta to 1/2
    x = series(GarmaParams(0.25, 0.2), 1024, seed=11)
    pr = L.profile_loglik_xi(x - x.mean(), 0.25)
    assert 0.05 < pr.delta < 0.4
    assert np.isfinite(pr.value)


def test_demod_profile_varies_smoothly_in_xi(gegenbauer_1024):
    # the grid re-indexes as xi moves; jumps between neighbours stay O(1)
    p, x = gegenbauer_1024
    xc = x - x.mean()
    xis = p.xi + np.linspace(-2, 2, 41) / 1024
    vals = np.array([L.profile_loglik_xi(xc, v).value for v in xis])
    assert np.all(np.isfinite(vals))
    assert np.max(np.abs(np.diff(vals))) < 15.0
    assert abs(xis[np.argmax(vals)] - p.xi) <= 1.5 / 1024


def test_whittle_skips_pole_ordinate():
    n = 256
    p = GarmaParams(32 / n, 0.3)
    x = series(p, n, seed=5)
    v = L.whittle_loglik(x, p)
    assert v.n_ordinates == n // 2
    assert np.isfinite(v.value)


def test_whittle_scaling_by_hand(rng):
    x = rng.standard_normal(64)
    p = GarmaParams(0.2, 0.0, sigma2=1.5)
    xc = x - x.mean()
    per = np.abs(np.fft.rfft(xc)) ** 2 / 64
    ref = -2.0 / 64 * np.sum(per / 1.5 + math.log(1.5))
    assert L.whittle_loglik(x, p).value == pytest.approx(ref, rel=1e-12)
    assert L.whittle_loglik(x, p, with_log_term=False).value == pytest.approx(-2.0 / 64 * np.sum(per / 1.5), rel=1e-12)


def test_scaled_periodogram_is_unit_exponential():
    # E[eta_j I_j] = 1 away from the pole, checked over replicated draws
    p = GarmaParams(1 / 7, 0.3)
    acc = []
    for r in range(500):
        x = series(p, 256, seed=77, rep=r)
        pg = demod_periodogram(x, p.xi)
        eta = L.eta_weights(p, pg.grid)
        far = np.abs(pg.grid.offsets) > 5
        acc.append(np.mean(eta[far] * pg.values[far]))
    assert np.mean(acc) == pytest.approx(1.0, abs=4 * np.std(acc) / math.sqrt(len(acc)) + 0.02)


def test_make_objective_rejects_unknown_method(gegenbauer_1024):
    with pytest.raises(ParameterError):
        L.make_objective(gegenbauer_1024[1], 0.2, "ols")


def test_arma_profile_recovers_ar_coefficient():
    p = GarmaParams(1 / 7, 0.2, phi=0.5)
    x = series(p, 2048, seed=8)
    pr = L.profile_loglik_xi(x - x.mean(), p.xi, (1, 0))
    assert pr.phi == pytest.approx(0.5, abs=0.1)
    assert pr.delta == pytest.approx(0.2, abs=0.1)


def test_sigma2_profile_unbiased_on_white_noise():
    p = GarmaParams(0.2, 0.0)
    ratios = [L.sigma2_profile(np.random.default_rng(500 + r).standard_normal(256), p) for r in range(500)]
    assert abs(np.mean(ratios) - 1.0) < 3 * np.std(ratios, ddof=1) / math.sqrt(500)


def test_exact_loglik_white_noise_and_reversal(rng):
    x = rng.standard_normal(40)
    assert L.exact_time_loglik(x, GarmaParams(0.2, 0.0)) == pytest.approx(
        -20 * math.log(2 * math.pi) - 0.5 * np.sum(x * x), rel=1e-12)
    p = GarmaParams(1 / 7, 0.35, 0.4, 0.2)
    assert L.exact_time_loglik(x[::-1], p) == pytest.approx(L.exact_time_loglik(x, p), rel=1e-10)


def test_whittle_homogeneity(rng):
    x = rng.standard_normal(256)
    p = GarmaParams(0.2, 0.3, phi=0.2)
    c = 3.0
    a = L.whittle_loglik(x, p, with_log_term=False).value
    b = L.whittle_loglik(c * x, p.with_(sigma2=c * c * p.sigma2), with_log_term=False).value
    assert b == pytest.approx(a, rel=1e-12)


def test_demod_loglik_finite_on_grid():
    x = series(GarmaParams(1 / 7, 0.3), 256, seed=12)
    vals = [L.demod_loglik(x, GarmaParams(xi, d)).value
            for xi in np.linspace(0.02, 0.48, 100) for d in np.linspace(0.0, 0.49, 100)]
    assert np.all(np.isfinite(vals))
