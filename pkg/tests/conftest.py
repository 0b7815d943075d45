import numpy as np
import pytest

from bsdsqueeze.phjts import CartanFactor

FACTORS = [
    CartanFactor.type_i(1, 1),
    CartanFactor.type_i(2, 2),
    CartanFactor.type_i(2, 3),
    CartanFactor.type_ii(4),
    CartanFactor.type_ii(5),
    CartanFactor.type_iii(2),
    CartanFactor.type_iii(3),
    CartanFactor.type_iv(3),
    CartanFactor.type_iv(5),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=FACTORS, ids=str)
def factor(request):
    return request.param


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
