import numpy as np
import pytest

from ingb.dataset import Dataset


def make_dataset(X, y, names=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y)
    k = max(2, int(y.max()) + 1)
    return Dataset(X, y, names or [f"c{i}" for i in range(k)])


@pytest.fixture
def toy():
    return make_dataset


@pytest.fixture
def two_blobs():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 0.3, (50, 2)), rng.normal(10, 0.3, (50, 2))])
    y = np.repeat([0, 1], 50)
    return make_dataset(X, y)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
