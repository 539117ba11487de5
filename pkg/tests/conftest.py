from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FIXTURE = np.array([0.0, 3.0, 1.0, 4.0])


@pytest.fixture
def fixture_values():
    return FIXTURE.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``record(number, passed, detail)``: log one acceptance line and assert it."""
    lines = request.config.stash.setdefault(_CRITERIA, {})

    def record(number: int, passed: bool, detail: str):
        lines[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
