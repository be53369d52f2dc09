import numpy as np
import pytest

from vertexkit.fmatrix import f_assemble
from vertexkit.taylor import SumConfig, mode_pair, required_length

# Profile used by the CLI default: one Richardson level over 2048 terms.
FAST_CFG = SumConfig(2048, "richardson1", 1e-4)
# Tighter profile for the summation identities.
TIGHT_CFG = SumConfig(8192, "richardson2", 1e-6)


@pytest.fixture(scope="session")
def fast_cfg():
    return FAST_CFG


@pytest.fixture(scope="session")
def tight_cfg():
    return TIGHT_CFG


@pytest.fixture(scope="session")
def modes3():
    """p = 3 tables long enough for every sum in the test-suite."""
    return mode_pair(3, 2 ** 16 + 8)


_F_CACHE = {}


def build_f(N, cfg=FAST_CFG):
    key = (N, cfg)
    if key not in _F_CACHE:
        a, b = mode_pair(3, required_length(cfg, N) + 2)
        _F_CACHE[key] = f_assemble(N, a, b, cfg, strict=False)
    return _F_CACHE[key]


@pytest.fixture(scope="session")
def F64():
    return build_f(64)


@pytest.fixture(scope="session")
def F256():
    return build_f(256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    test_acceptance = sys.modules.get("test_acceptance")
    if test_acceptance is not None and test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[num])
