import math

import numpy as np
import pytest
from scipy import stats

from conftest import series
from seaper import estimation as E
from seaper.errors import ParameterError
from seaper.likelihood import delta_information
from seaper.spectral import GarmaParams


@pytest.fixture(scope="module")
def fitted():
    p = GarmaParams(1 / 7, 0.4)
    x = series(p, 1024, seed=31)
    return p, x, E.fit(x)


def test_fit_recovers_parameters(fitted):
    p, _, f = fitted
    assert abs(f.params_hat.xi - p.xi) < 2 / 1024
    assert f.params_hat.delta == pytest.approx(p.delta, abs=0.1)
    assert f.params_hat.sigma2 == pytest.approx(1.0, rel=0.2)
    assert f.method == "demodulated" and f.model_order == (0, 0)


def test_stage_two_never_worse(fitted):
    d = fitted[2].diagnostics
    assert d["stage"] == "two_stage"
    assert d["stage2_value"] >= d["stage1_value"]


def test_fit_is_deterministic(fitted):
    _, x, f = fitted
    assert E.fit(x).as_dict() == f.as_dict()


def test_intervals_contain_estimates(fitted):
    f = fitted[2]
    lo, hi = f.ci_delta
    assert lo <= f.params_hat.delta <= hi
    for lo, hi in (f.ci_xi_cauchy, f.ci_xi_finite):
        assert lo < f.params_hat.xi < hi
    assert f.diagnostics["ci_xi_finite_fallback"] is False


def test_fisher_matches_likelihood_information(fitted):
    f = fitted[2]
    assert f.fisher_dd == pytest.approx(delta_information(f.params_hat, f.n), rel=1e-12)


def test_whittle_fisher_by_hand(rng):
    n = 64
    p = GarmaParams(0.2, 0.3)
    lam = np.arange(n // 2 + 1) / n
    sep = np.abs(2 * np.sin(np.pi * (lam - 0.2))) * np.abs(2 * np.sin(np.pi * (lam + 0.2)))
    ref = np.sum((2 * np.log(sep[sep > 0])) ** 2)
    assert E.fisher_dd(rng.standard_normal(n), p, "whittle") == pytest.approx(ref, rel=1e-12)


def test_fisher_grows_with_n():
    p = GarmaParams(1 / 7, 0.3)
    vals = [E.fisher_dd(np.zeros(n), p) for n in (128, 256, 512, 1024)]
    assert np.all(np.diff(vals) > 0)


def test_ci_delta_width_and_clipping():
    lo, hi = E.ci_delta(0.3, 0.05, information=400.0)
    assert hi - lo == pytest.approx(2 * stats.norm.ppf(0.975) / 20.0, rel=1e-12)
    assert E.ci_delta(0.01, 0.05, information=4.0)[0] == 0.0
    assert E.ci_delta(0.49, 0.05, information=4.0)[1] == 0.5


def test_cauchy_interval_half_width():
    lo, hi = E.ci_xi_cauchy(0.2, 0.05, n=1000)
    assert (hi - lo) / 2 * 1000 == pytest.approx(3.20, rel=0.01)
    assert E.CAUCHY_SCALE == pytest.approx(0.2516, abs=1e-4)


def test_alpha_validation():
    for a in (0.0, 1.0, -0.1):
        with pytest.raises(ParameterError):
            E.ci_xi_cauchy(0.2, a, n=100)


def test_finite_interval_symmetric_and_narrower_than_cauchy():
    (lo, hi), fell_back = E.ci_xi_finite(0.2, 0.05, n=1024, delta=0.3)
    assert not fell_back
    assert 0.2 - lo == pytest.approx(hi - 0.2, rel=1e-12)
    c_lo, c_hi = E.ci_xi_cauchy(0.2, 0.05, n=1024)
    assert hi - lo < c_hi - c_lo


def test_bic_parameter_count():
    assert E.bic(-100.0, 1000, (0, 0)) == pytest.approx(3 * math.log(1000) + 200.0)
    assert E.bic(-100.0, 1000, (1, 1)) - E.bic(-100.0, 1000, (0, 0)) == pytest.approx(2 * math.log(1000))


def test_fix_xi_skips_search(fitted):
    x = fitted[1]
    f = E.fit(x, search=E.SearchConfig(fix_xi=0.25))
    assert f.params_hat.xi == 0.25
    assert f.diagnostics["stage"] == "fixed_xi"


def test_search_bounds_respected(fitted):
    x = fitted[1]
    f = E.fit(x, search=E.SearchConfig(xi_min=0.3, xi_max=0.4))
    assert 0.3 <= f.params_hat.xi <= 0.4


def test_input_validation(fitted):
    x = fitted[1]
    with pytest.raises(ParameterError):
        E.fit(x[:64])
    with pytest.raises(ParameterError):
        E.fit(x, model_order=(2, 0))
    with pytest.raises(ParameterError):
        E.fit(x, method="ols")
    with pytest.raises(ParameterError):
        E.fit(x, search=E.SearchConfig(fix_xi=0.7))


def test_whittle_fit_on_fourier_lattice(fitted):
    f = E.fit(fitted[1], method="whittle")
    assert f.method == "whittle"
    assert abs(f.params_hat.xi - 1 / 7) < 2 / 1024


def test_detrend_removes_linear_trend(fitted):
    _, x, f = fitted
    t = np.arange(x.size)
    g = E.fit(x + 0.01 * t, detrend=True)
    assert g.params_hat.xi == pytest.approx(f.params_hat.xi, abs=1 / 1024)
    assert g.params_hat.delta == pytest.approx(f.params_hat.delta, abs=0.03)


def test_white_noise_memory_small():
    est = [E.fit(np.random.default_rng(100 + r).standard_normal(512)).params_hat.delta for r in range(10)]
    assert np.mean(est) < 0.1


def test_arma_fit_and_selection():
    p = GarmaParams(1 / 7, 0.3, phi=0.6)
    x = series(p, 2048, seed=13)
    best, table = E.select_model(x, orders=((0, 0), (1, 0)))
    assert best.model_order == (1, 0)
    assert best.params_hat.phi == pytest.approx(0.6, abs=0.1)
    assert [row["order"] for row in table] == [[0, 0], [1, 0]]
    assert table[1]["bic"] < table[0]["bic"]


def test_select_rejects_empty_orders(fitted):
    with pytest.raises(ParameterError):
        E.select_model(fitted[1], orders=())


def test_fisher_linear_growth():
    p = GarmaParams(1 / 7, 0.3)
    a, b, c = (E.fisher_dd(np.zeros(n), p) for n in (512, 1024, 2048))
    assert b / a == pytest.approx(2.0, rel=0.1)
    assert c / b == pytest.approx(2.0, rel=0.1)


def test_nested_orders_dominate(fitted):
    x = fitted[1]
    f00 = E.fit(x, model_order=(0, 0))
    f11 = E.fit(x, model_order=(1, 1))
    assert -2 * f11.loglik <= -2 * f00.loglik + 1e-6


def test_pole_estimate_leaves_fourier_grid():
    n = 256
    p = GarmaParams(0.13, 0.4)
    offs = []
    for r in range(20):
        xi = E.fit(series(p, n, seed=55, rep=r)).params_hat.xi
        offs.append(n * xi - round(n * xi))
    assert np.mean(np.abs(offs) < 1e-9) < 0.8
