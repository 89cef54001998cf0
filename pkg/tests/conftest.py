import numpy as np
import pytest

from kpospec.operators import KpoParams

PRESET_DELTAS_MHZ = {"delta_plus": 8.20, "delta_zero": 0.05, "delta_minus": -8.10}

# acceptance lines collected during the run, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def device(delta_mhz: float, dim: int = 30, **kw) -> KpoParams:
    return KpoParams.from_mhz(delta_mhz, 17.0, 0.27, 0.45, dim=dim, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
