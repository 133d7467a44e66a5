import os

import numpy as np
import pytest

from seaper.simulation import simulate
from seaper.spectral import GarmaParams

_REPORT: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance-criterion verdict; printed in the terminal summary."""

    def _add(name: str, ok: bool, detail: str = "") -> bool:
        _REPORT.append((name, bool(ok), detail))
        return bool(ok)

    return _add


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_REPORT, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SEAPER_SLOW", "") in ("1", "true", "yes"):
        return
    skip = pytest.mark.skip(reason="long Monte Carlo profile; set SEAPER_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def gegenbauer_1024():
    p = GarmaParams(1 / 7, 0.45)
    return p, simulate(p, 1024, seed=20240601, rep=0)


def series(params, n, seed, rep=0):
    return simulate(params, n, seed=seed, rep=rep)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
