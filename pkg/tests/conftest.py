import math

import numpy as np
import pytest


def zeta3_series() -> float:
    """Sum of 1/j^3 by direct summation plus an Euler-Maclaurin tail."""
    n = 200_000
    j = np.arange(1, n + 1, dtype=float)
    head = math.fsum(1.0 / j[::-1] ** 3)
    N = n + 0.5
    return head + 1.0 / (2.0 * N * N)


ZETA3 = zeta3_series()


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
