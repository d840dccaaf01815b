import numpy as np
import pytest

from seclogreg.analysis import sigmoid
from seclogreg.data import Dataset, partition
from seclogreg.ring import FixedPointCodec

BETA_STAR = np.array([-0.5, 1.0, -1.0, 0.5, 0.25, -0.25, 0.75, -0.75])


def synth_dataset(seed, n=200, d=4, scale=1.0):
    """Intercept plus standard-normal features, labels drawn from a known logistic model."""
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), scale * rng.normal(size=(n, d - 1))])
    y = (rng.random(n) < sigmoid(X @ BETA_STAR[:d])).astype(float)
    return Dataset(X, y, [f"x{i}" for i in range(d)])


def synth_inputs(seed, n=200, d=4, P=2, scheme="horizontal", codec=None):
    ds = synth_dataset(seed, n, d)
    return ds, partition(ds, scheme, P, np.random.default_rng(seed + 1000), codec or FixedPointCodec())


@pytest.fixture
def codec():
    return FixedPointCodec()


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
