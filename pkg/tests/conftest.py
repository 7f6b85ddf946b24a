import pytest
from hypothesis import HealthCheck, settings

from alloy_rem.verify import PoolCache

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def pools():
    """Acceptance replica pools, simulated lazily and shared across test modules."""
    return PoolCache(seed=1)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
