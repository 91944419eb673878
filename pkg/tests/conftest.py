import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("FDSTC_HYPOTHESIS_PROFILE", "default"))

import functools

import pytest

from fdstc import presets


@functools.lru_cache(maxsize=None)
def cached_preset(name):
    return presets.build(name)


@pytest.fixture(scope="session")
def preset():
    return cached_preset


def pytest_configure(config):
    config._criteria = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(number, passed, detail)."""
    def record(number, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        request.config._criteria.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, config):
    if config._criteria:
        terminalreporter.section("acceptance criteria")
        for line in config._criteria:
            terminalreporter.write_line(line)
