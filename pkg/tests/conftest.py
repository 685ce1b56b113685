import numpy as np
import pytest

from shrinker_lab.geometry import QuadratureGrid


@pytest.fixture(scope="session")
def grid():
    return QuadratureGrid(64)


@pytest.fixture(scope="session")
def small_grid():
    return QuadratureGrid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def random_rotation(rng, dim=4):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
