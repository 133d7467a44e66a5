"""Selects the compiled kernels when available, else the pure-Python ones.

Set ``SEAPER_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SEAPER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"


def gegenbauer_coefficients(eta, delta, n):
    return _impl.gegenbauer_coefficients(float(eta), float(delta), int(n))


def levinson_simulate(gamma, z):
    return _impl.levinson_simulate(gamma, z)
