import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import special

from seaper import _kernels_py, kernels
from seaper.spectral import GarmaParams, acv

try:
    from seaper import _kernels as _compiled
except ImportError:
    _compiled = None

needs_ext = pytest.mark.skipif(_compiled is None, reason="compiled extension not built")


def test_gegenbauer_matches_scipy():
    # C_k^(d)(eta) from scipy's orthogonal-polynomial evaluator
    eta, d = np.cos(2 * np.pi / 7), 0.35
    c = kernels.gegenbauer_coefficients(eta, d, 30)
    ref = [special.eval_gegenbauer(k, d, eta) for k in range(30)]
    np.testing.assert_allclose(c, ref, rtol=1e-10, atol=1e-14)


def test_levinson_reproduces_covariance_factor():
    gamma = np.asarray(acv(GarmaParams(0.2, 0.3, phi=0.4), 16).gamma)
    t = np.array([[gamma[abs(i - j)] for j in range(16)] for i in range(16)])
    # x = L z with L L^T = T, so the map z -> x has Gram matrix T
    basis = np.array([kernels.levinson_simulate(gamma, e)[0] for e in np.eye(16)]).T
    np.testing.assert_allclose(basis @ basis.T, t, rtol=1e-10, atol=1e-12)


def test_levinson_flags_indefinite_input():
    _, bad = kernels.levinson_simulate(np.array([1.0, 1.5, 0.0, 0.0]), np.ones(4))
    assert bad >= 0


@needs_ext
def test_backends_agree(rng):
    for eta, d in ((0.3, 0.2), (-0.9, 0.45), (1.0, 0.1)):
        np.testing.assert_allclose(_compiled.gegenbauer_coefficients(eta, d, 500),
                                   _kernels_py.gegenbauer_coefficients(eta, d, 500), rtol=1e-12, atol=1e-300)
    gamma = np.asarray(acv(GarmaParams(1 / 7, 0.45), 512).gamma)
    z = rng.standard_normal(512)
    xc, bc = _compiled.levinson_simulate(gamma, z)
    xp, bp = _kernels_py.levinson_simulate(gamma, z)
    np.testing.assert_allclose(xc, xp, rtol=1e-10, atol=1e-12)
    assert bc == bp == -1


@needs_ext
def test_compiled_backend_selected_by_default():
    assert kernels.BACKEND == "cython"


def test_pure_python_fallback_selected_by_env():
    env = {**os.environ, "SEAPER_PURE_PYTHON": "1"}
    code = "from seaper import kernels, simulate, GarmaParams; print(kernels.BACKEND, simulate(GarmaParams(0.2, 0.3), 64, seed=1)[:3])"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    assert out.startswith("python")
