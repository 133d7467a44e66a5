import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from seaper.errors import ParameterError
from seaper.spectral import GarmaParams, acv, f_dagger, fractional_acv, ma_coefficients, sdf

xis = st.floats(0.01, 0.49)
deltas = st.floats(0.0, 0.49)
coefs = st.floats(-0.95, 0.95)


@st.composite
def params(draw):
    return GarmaParams(draw(xis), draw(deltas), draw(coefs), draw(coefs), draw(st.floats(0.1, 10.0)))


def test_params_validation():
    for bad in [dict(xi=0.0, delta=0.2), dict(xi=0.5, delta=0.2), dict(xi=0.2, delta=0.5),
                dict(xi=0.2, delta=-0.1), dict(xi=0.2, delta=0.2, phi=1.0),
                dict(xi=0.2, delta=0.2, theta=-1.0), dict(xi=0.2, delta=0.2, sigma2=0.0),
                dict(xi=math.nan, delta=0.2)]:
        with pytest.raises(ParameterError):
            GarmaParams(**bad)


def test_white_noise_sdf_flat():
    assert sdf(GarmaParams(0.25, 0.0), 0.1) == pytest.approx(1.0, rel=1e-15)


def test_sdf_pole_is_infinite():
    assert sdf(GarmaParams(0.25, 0.2), 0.25) == math.inf


def test_sdf_matches_multiprecision_evaluation():
    mpmath.mp.dps = 40
    lam, xi, d = mpmath.mpf("0.3"), mpmath.mpf(1) / 7, mpmath.mpf("0.45")
    ref = abs(2 * mpmath.cos(2 * mpmath.pi * lam) - 2 * mpmath.cos(2 * mpmath.pi * xi)) ** (-2 * d)
    assert sdf(GarmaParams(1 / 7, 0.45), 0.3) == pytest.approx(float(ref), rel=1e-13)


def test_arma_part_of_sdf():
    # |1 + theta e^{-i w}|^2 / |1 - phi e^{-i w}|^2 evaluated directly
    p = GarmaParams(0.2, 0.0, phi=0.5, theta=-0.3, sigma2=2.0)
    lam = 0.13
    z = np.exp(-2j * np.pi * lam)
    ref = 2.0 * abs(1 - 0.3 * z) ** 2 / abs(1 - 0.5 * z) ** 2
    assert sdf(p, lam) == pytest.approx(ref, rel=1e-14)


def test_f_dagger_limit_at_pole():
    assert f_dagger(GarmaParams(0.25, 0.3), 0.25) == pytest.approx((4 * math.pi) ** -0.6, rel=1e-14)


def test_f_dagger_equals_sdf_without_memory():
    p = GarmaParams(0.2, 0.0, phi=0.4)
    lam = np.linspace(-0.5, 0.5, 41)
    np.testing.assert_allclose(f_dagger(p, lam), sdf(p, lam), rtol=1e-15)


@given(params(), st.floats(-0.5, 0.5))
def test_sdf_symmetric(p, lam):
    assert sdf(p, lam) == sdf(p, -lam)


@settings(max_examples=200)
@given(params(), st.floats(-0.5, 0.5))
def test_pole_factorization(p, lam):
    if abs(lam - p.xi) < 1e-9:
        return
    lhs = f_dagger(p, lam) * abs(lam - p.xi) ** (-2 * p.delta)
    rhs = sdf(p, lam)
    if np.isfinite(rhs):
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_factorization_on_random_frequencies(rng):
    p = GarmaParams(1 / 7, 0.37, 0.3, -0.2, 1.7)
    lam = rng.uniform(-0.5, 0.5, 100)
    np.testing.assert_allclose(f_dagger(p, lam) * np.abs(lam - p.xi) ** (-2 * p.delta), sdf(p, lam), rtol=1e-12)


def test_ma_coefficients_identity_filter():
    c = ma_coefficients(GarmaParams(0.2, 0.0), 10)
    np.testing.assert_array_equal(c, np.r_[1.0, np.zeros(9)])


def test_ma_coefficients_quarter_frequency_odd_term():
    # cos(pi/2) is 6e-17 in floating point, not 0
    assert abs(ma_coefficients(GarmaParams(0.25, 0.3), 5)[1]) < 1e-15


def test_ma_coefficients_generating_function():
    p = GarmaParams(1 / 7, 0.4)
    c = ma_coefficients(p, 200)
    eta = math.cos(2 * math.pi / 7)
    z = 0.5
    assert np.polyval(c[::-1], z) == pytest.approx((1 - 2 * eta * z + z * z) ** -0.4, rel=1e-8)


def test_acv_white_noise():
    g = acv(GarmaParams(0.3, 0.0, sigma2=2.0), 8).gamma
    np.testing.assert_allclose(g, np.r_[2.0, np.zeros(7)], atol=1e-12)


def test_acv_ar1():
    g = acv(GarmaParams(0.3, 0.0, phi=0.6), 20).gamma
    np.testing.assert_allclose(g, 0.6 ** np.arange(20) / 0.64, rtol=1e-10)


def test_acv_ma1():
    g = acv(GarmaParams(0.3, 0.0, theta=0.5), 4).gamma
    np.testing.assert_allclose(g, [1.25, 0.5, 0.0, 0.0], atol=1e-12)


def test_fractional_acv_closed_form():
    # gamma_0 = Gamma(1 - 2d) / Gamma(1 - d)^2, rho_1 = d / (1 - d)
    a = fractional_acv(0.3, 3)
    assert a[0] == pytest.approx(math.gamma(0.4) / math.gamma(0.7) ** 2, rel=1e-14)
    assert a[1] / a[0] == pytest.approx(0.3 / 0.7, rel=1e-14)


def _acv_quadrature(p: GarmaParams, tau: int) -> float:
    # 2 * int_0^{1/2} sdf cos(2 pi lam tau); the |lam - xi|^(-2 delta) factor goes into the weight
    def smooth(lam):
        return f_dagger(p, lam) * math.cos(2 * math.pi * lam * tau)

    d = p.delta
    left, _ = integrate.quad(smooth, 0.0, p.xi, weight="alg", wvar=(0.0, -2 * d), limit=400, epsabs=1e-13)
    right, _ = integrate.quad(smooth, p.xi, 0.5, weight="alg", wvar=(-2 * d, 0.0), limit=400, epsabs=1e-13)
    return 2.0 * (left + right)


@pytest.mark.parametrize("xi", [1 / 7, 1 / 12, 0.3])
@pytest.mark.parametrize("delta", [0.1, 0.3, 0.45])
def test_acv_matches_spectral_quadrature(xi, delta):
    p = GarmaParams(xi, delta)
    g = acv(p, 51).gamma
    for tau in (0, 1, 7, 20, 50):
        ref = _acv_quadrature(p, tau)
        assert g[tau] == pytest.approx(ref, rel=1e-5, abs=1e-7 * g[0])


def test_acv_with_arma_matches_quadrature():
    p = GarmaParams(1 / 7, 0.3, phi=0.5, theta=0.4, sigma2=1.3)
    g = acv(p, 51).gamma
    for tau in (0, 1, 7, 50):
        assert g[tau] == pytest.approx(_acv_quadrature(p, tau), rel=1e-5, abs=1e-7 * g[0])


@pytest.mark.parametrize("delta", [0.2, 0.45])
def test_acv_toeplitz_positive_definite(delta):
    a = acv(GarmaParams(1 / 7, delta, 0.5, -0.5), 64)
    assert np.all(np.abs(a.gamma) <= a.gamma[0] + 1e-15)
    assert np.linalg.eigvalsh(a.toeplitz()).min() > -1e-8 * a.gamma[0]


def test_acv_is_read_only():
    g = acv(GarmaParams(0.2, 0.3), 8).gamma
    with pytest.raises(ValueError):
        g[0] = 0.0
