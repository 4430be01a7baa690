import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def _backends():
    from hyperwave.kernels import available_backends

    return sorted(available_backends())


@pytest.fixture(params=_backends())
def backend(request, monkeypatch):
    """Run a test once per importable kernel backend by patching the dispatch module."""
    from hyperwave import kernels

    mod = kernels.available_backends()[request.param]
    for name in ("hyp_series", "taylor_step", "rk4_linear", "rk4_cubic", "rk4_forced"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance summary -------------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
