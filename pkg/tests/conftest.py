import numpy as np
import pytest

from logse_lab.grid import GridFunction, GridSpec

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_gridfunction(rng, spec: GridSpec, scale: float = 1.0) -> GridFunction:
    z = rng.standard_normal(spec.interior_shape) + 1j * rng.standard_normal(spec.interior_shape)
    return GridFunction.from_interior(spec, scale * z)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
