from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

# fixed seed: every property run draws the same examples
settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fixed")

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def cache(tmp_path):
    from symkl.cache import Cache
    return Cache(tmp_path / "cache")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
