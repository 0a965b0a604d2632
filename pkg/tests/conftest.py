import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def smooth_state(rng, n, amp_rho=0.2, amp_q=0.5, modes=3):
    """Random smooth periodic (rho, q) on an ``n x n`` unit grid."""
    x = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(x, x, indexing="ij")

    def field(amp):
        f = np.zeros((n, n))
        for _ in range(modes):
            kx, ky = rng.integers(0, 3, size=2)
            ph = rng.uniform(0, 2 * np.pi)
            f += rng.normal() * np.cos(2 * np.pi * (kx * X + ky * Y) + ph)
        return amp * f / modes

    rho = 1.0 + field(amp_rho)
    q = np.stack([field(amp_q), field(amp_q)], axis=-1)
    return rho, q


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
