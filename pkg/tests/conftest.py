import math

import numpy as np
import pytest


def trial_squarefree(n: int) -> bool:
    """Independent oracle: no d^2 with d >= 2 divides n."""
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def trial_mobius(n: int) -> int:
    m, k, p = n, 0, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            k += 1
        p += 1
    if m > 1:
        k += 1
    return -1 if k % 2 else 1


@pytest.fixture(scope="session")
def sqf_small():
    """mu^2 as a bool array on 0..20000 (index 0 False), from trial division."""
    return np.array([False] + [trial_squarefree(n) for n in range(1, 20001)])


def e(x: float) -> complex:
    return complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
