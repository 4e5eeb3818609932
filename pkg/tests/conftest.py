import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("quasilap", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("quasilap")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def band_limited(grid, rng, modes=3, amp=1.0, real=False):
    """Random trigonometric polynomial with ``|m|, |n| <= modes`` in lattice coordinates."""
    x1, x2 = grid.coords
    out = np.zeros(grid.shape, dtype=complex)
    for m in range(-modes, modes + 1):
        for n in range(-modes, modes + 1):
            c = complex(rng.normal(), rng.normal()) * amp / (1 + m * m + n * n)
            out += c * np.exp(2j * np.pi * (m * x1 + n * x2))
    return out.real + 0j if real else out


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(LINES):
            terminalreporter.write_line(LINES[k])
