import numpy as np
import pytest

from spherereg.instance import RegressionInstance


def random_instance(rng, n, d, signed=True, planted=False, sigma=0.0):
    if signed:
        A = rng.normal(size=(n, d)) * rng.uniform(0.2, 3.0, (n, 1))
    else:
        A = rng.uniform(0.0, 200.0, (n, d))
    if planted:
        x = rng.normal(size=d)
        x /= np.linalg.norm(x)
        b = A @ x + rng.normal(0.0, sigma, n) if sigma else A @ x
        return RegressionInstance(A, b), x
    b = rng.normal(size=n) * rng.uniform(0.0, 2.0) if signed else rng.uniform(0.0, 200.0, n)
    return RegressionInstance(A, b)


def unit(rng, d, count=None):
    X = rng.normal(size=(count or 1, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return X if count else X[0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
