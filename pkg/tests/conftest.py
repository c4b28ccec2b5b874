import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from srcurrent.model import SystemParams, ladder_params

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def symmetric_ring():
    """Identical cavities with moderate loss, inside the ordered phase."""
    return SystemParams(cavity_freqs=(0.5, 0.5, 0.5), hopping=0.1, coupling=0.35,
                        cavity_loss=0.3)


@pytest.fixture
def ladder():
    """Detuned ladder of detuned cavities with uniform frequency steps."""
    return ladder_params(0.1, 0.5, hopping=0.2, coupling=0.35, cavity_loss=0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
