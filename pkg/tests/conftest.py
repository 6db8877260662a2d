import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lconvex import SmoothBody

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_body(rng, a0=1.0, kmax=4, scale=0.04, symmetric=False):
    """Smooth body with small random harmonics k = 2..kmax."""
    cos = np.zeros(kmax)
    sin = np.zeros(kmax)
    for k in range(2, kmax + 1):
        if symmetric and k % 2:
            continue
        cos[k - 1] = rng.uniform(-scale, scale) * a0 / k
        sin[k - 1] = rng.uniform(-scale, scale) * a0 / k
    return SmoothBody(a0, cos=cos, sin=sin, name="random")


def random_pair(rng):
    """K small and round, L large: max kappa_L < 1 < min kappa_K."""
    K = random_body(rng, a0=rng.uniform(0.4, 0.7), scale=0.05)
    L = random_body(rng, a0=rng.uniform(1.6, 2.5), scale=0.08)
    return K, L


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def generic_L():
    return SmoothBody(1.0, cos=[0, 0.12, 0.03, 0.01], sin=[0, -0.05, 0.02], name="generic")


@pytest.fixture
def disc_pair():
    return SmoothBody.disc(0.8), SmoothBody.disc(2.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def add(number, passed, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"))

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
