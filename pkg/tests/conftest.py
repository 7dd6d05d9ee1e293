import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quadnls.model import FieldPair
from quadnls.spectral import ComplexField, make_grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_field(grid, rng, nyquist=True):
    raw = (rng.standard_normal(grid.num_points) + 1j * rng.standard_normal(grid.num_points))
    if not nyquist:
        raw[grid.nyquist_index] = 0
    return ComplexField.from_raw(grid, raw)


def random_pair(grid, rng, nyquist=True):
    return FieldPair(random_field(grid, rng, nyquist), random_field(grid, rng, nyquist))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid2pi():
    return make_grid(2 * np.pi, 32)


# Acceptance results, keyed by criterion number: (passed, detail).
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    assert passed, f"criterion {number}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
