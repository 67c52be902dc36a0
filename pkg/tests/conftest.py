import numpy as np
import pytest
from hypothesis import settings

from rase import LabeledDataset

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def make_gaussian(rng, n, p, shift=1.0):
    y = np.arange(n) % 2
    X = rng.standard_normal((n, p))
    X[y == 1, 0] += shift
    return LabeledDataset(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
