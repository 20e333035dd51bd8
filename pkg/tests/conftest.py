import numpy as np
import pytest

from funcldp import _backend
from funcldp.func_core import uniform_grid


def _cores():
    out = [pytest.param(_backend.python_core, id="python")]
    compiled = _backend.compiled_core()
    if compiled is not None:
        out.append(pytest.param(compiled, id="compiled"))
    return out


@pytest.fixture(params=_cores())
def core(request):
    return request.param


@pytest.fixture
def grid():
    return uniform_grid(101)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(s.split()[1].rstrip("ab:")), s)):
            terminalreporter.write_line(line)
