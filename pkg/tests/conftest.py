from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from henon_brody.acceptance import default_orbit
from henon_brody.henon import DEFAULT_MAP
from henon_brody.manifold import build_local_series

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def f():
    return DEFAULT_MAP


@pytest.fixture(scope="session")
def orbit(f):
    return default_orbit(f)


@pytest.fixture(scope="session")
def chart(f, orbit):
    return build_local_series(f, orbit, 20)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
