import numpy as np
import pytest

from usfdr import _fallback

try:
    from usfdr import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [pytest.param(_fallback, id="fallback"),
            pytest.param(_kernels, id="compiled",
                         marks=pytest.mark.skipif(_kernels is None,
                                                  reason="extension not built"))]


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
