import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from drudespec import MediumParams, classify, collocated_layout, cut_curves, staggered_layout
from drudespec.checks import DEFAULT_MEDIUM, REFERENCE_FIELD, RESONANT_MEDIUM

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])


@pytest.fixture
def criterion_lines(request):
    return request.config.stash[_CRITERIA]


@pytest.fixture(scope="session")
def medium():
    """Omega_e < Omega_m, so every zone (DI included) is present."""
    return DEFAULT_MEDIUM


@pytest.fixture(scope="session")
def unit_medium():
    return RESONANT_MEDIUM


@pytest.fixture(scope="session")
def cc(medium):
    return cut_curves(medium)


@pytest.fixture(scope="session")
def layout():
    return collocated_layout(20.0, 1000)


@pytest.fixture(scope="session")
def small_layout():
    return collocated_layout(12.0, 480)


@pytest.fixture(scope="session")
def stag_layout():
    return staggered_layout(12.0, 300)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def reference_field():
    return REFERENCE_FIELD


@pytest.fixture
def zone_sample(rng):
    """zone_sample(p, kind) -> random (k, lam, zone) with zone.kind == kind, lam > 0."""

    def draw(p: MediumParams, kind, k_range=(0.05, 4.0), lam_max=4.0):
        for _ in range(100000):
            k = rng.uniform(*k_range)
            lam = rng.uniform(0.02, lam_max)
            zone = classify(p, k, lam)
            if zone.kind is kind:
                return float(k), float(lam), zone
        raise RuntimeError(f"no sample found in {kind}")

    return draw
