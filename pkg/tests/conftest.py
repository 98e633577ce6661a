import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gsg.entanglement import ExperimentConfig

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

spins = st.integers(min_value=1, max_value=12).map(lambda n: n / 2)
small_spins = st.integers(min_value=1, max_value=6).map(lambda n: n / 2)
angles = st.floats(min_value=0.0, max_value=math.pi, allow_nan=False)
phis = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


@pytest.fixture
def preset():
    """Screened two-interferometer configuration used throughout the tables."""
    return ExperimentConfig(tau=2.0, mass_a=1e-14, mass_b=1e-14, delta_x=2.5e-4, delta_s=5e-5)


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng, d, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
