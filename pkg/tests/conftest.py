import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def density_matrices(draw, num_qubits=None):
    """Random full-rank-ish density operators built as G G^dagger / tr."""
    n = draw(st.integers(1, 3)) if num_qubits is None else num_qubits
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    d = 2**n
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


unit = st.floats(0.0, 1.0, allow_nan=False)
below_one = st.floats(0.0, 0.99, allow_nan=False)
angles = st.floats(0.0, 2 * math.pi, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)
