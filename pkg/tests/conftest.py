import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tfpilots.grid import ComplexGrid

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# lines appended by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


finite = st.floats(-4, 4, allow_nan=False, allow_infinity=False)


@st.composite
def grids(draw, max_rows=4, max_cols=4, max_offset=3):
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    re = draw(st.lists(finite, min_size=rows * cols, max_size=rows * cols))
    im = draw(st.lists(finite, min_size=rows * cols, max_size=rows * cols))
    data = (np.array(re) + 1j * np.array(im)).reshape(rows, cols)
    r0 = draw(st.integers(-max_offset, max_offset))
    c0 = draw(st.integers(-max_offset, max_offset))
    return ComplexGrid(data, r0, c0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
