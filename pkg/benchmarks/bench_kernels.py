"""Times the compiled kernels against the pure-Python fallback.

Run: python3 benchmarks/bench_kernels.py [--n 2048] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from seaper import _kernels_py
from seaper.spectral import GarmaParams, acv

try:
    from seaper import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    gamma = np.asarray(acv(GarmaParams(1 / 7, 0.45), args.n).gamma)
    z = np.random.default_rng(0).standard_normal(args.n)
    cases = {
        "levinson_simulate": lambda m: m.levinson_simulate(gamma, z),
        "gegenbauer_coefficients": lambda m: m.gegenbauer_coefficients(np.cos(2 * np.pi / 7), 0.45, 64 * args.n),
    }
    print(f"{'kernel':26s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, call in cases.items():
        tp = _time(lambda: call(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:26s} {1e3 * tp:12.2f} {'-':>12s} {'-':>8s}")
            continue
        tc = _time(lambda: call(_kernels), args.repeat)
        a, b = call(_kernels_py), call(_kernels)
        same = np.allclose(a[0] if isinstance(a, tuple) else a, b[0] if isinstance(b, tuple) else b, rtol=1e-10, atol=1e-12)
        print(f"{name:26s} {1e3 * tp:12.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}{'' if same else '  MISMATCH'}")


if __name__ == "__main__":
    main()
