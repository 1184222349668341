import numpy as np
import pytest

from nnlad import _backend
from nnlad.expander import generate_dlrbg


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    prev = _backend.kernels
    _backend.use(request.param)
    yield request.param
    _backend.kernels = prev


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def desk_matrix():
    return generate_dlrbg(256, 64, 8, seed=1)


def sparse_signal(rng, N, S):
    x = np.zeros(N)
    x[rng.choice(N, S, replace=False)] = rng.exponential(size=S) + 0.1
    return x


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
