import numpy as np
import pytest
from hypothesis import settings

from discord_gate.linalg import RandomSource, partial_trace_bath, kron

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# lines collected by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return RandomSource(20240611).generator()


def direct_image(d, U, i, j):
    """Image of the declared-basis unit |i><j| under the map induced by U, via the joint partial trace."""
    if d.tag(i, j).value != "one":
        return np.zeros((d.dS, d.dS), dtype=complex)
    V = d.basis
    unit = np.outer(V[:, i], V[:, j].conj())
    joint = U @ kron(unit, d.bath_ops[i, j]) @ U.conj().T
    return partial_trace_bath(joint, d.dS, d.dB)
